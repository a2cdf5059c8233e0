#include "msa/diagonalize.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

#include "msa/algebra.hpp"
#include "msa/rng.hpp"

namespace msa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool numerically_diagonal(const Matrix& a) {
    Matrix off = a;
    off.diagonal().setZero();
    return off.norm() <= 1e-14 * std::max(1.0, a.norm());
}

bool upper_triangular_within(const Matrix& a, double rel_tol) {
    double lower = 0.0;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < i; ++j) lower = std::hypot(lower, std::abs(a(i, j)));
    return lower <= rel_tol * std::max(1.0, a.norm());
}

double min_eigenvalue_gap(const Vector& evals) {
    double gap = kInf;
    for (int i = 0; i < evals.size(); ++i)
        for (int j = i + 1; j < evals.size(); ++j)
            gap = std::min(gap, std::abs(evals(i) - evals(j)));
    return evals.size() < 2 ? kInf : gap;
}

}  // namespace

DiagonalizationResult approx_diagonalize(const Matrix& a, double eps,
                                         uint64_t seed) {
    if (eps <= 0) throw std::invalid_argument("approx_diagonalize: eps must be positive");
    const int d = static_cast<int>(a.rows());
    if (a.cols() != d) throw std::invalid_argument("approx_diagonalize: matrix not square");

    if (numerically_diagonal(a)) {
        DiagonalizationResult res;
        res.p = Matrix::Identity(d, d);
        res.eigenvalues = a.diagonal();
        res.e = Matrix::Zero(d, d);
        res.kappa = double(d);  // ||I||_F^2
        return res;
    }

    auto rng = make_stream(seed, "approx-diagonalize");
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);

    Matrix e_total = Matrix::Zero(d, d);
    double spread = eps / 2.0;
    double best_gap = 0.0;
    for (int attempt = 0; attempt <= 10; ++attempt) {
        Matrix b = a + e_total;
        Eigen::ComplexEigenSolver<Matrix> ces(b, true);
        if (ces.info() == Eigen::Success) {
            Vector evals = ces.eigenvalues();
            Matrix v = ces.eigenvectors();
            double rho = evals.cwiseAbs().maxCoeff();
            double gap = min_eigenvalue_gap(evals);
            best_gap = std::max(best_gap, gap);
            if (gap > 1e-8 * rho && gap > 0.0) {
                try {
                    auto inv = invert_checked(v, 1e10);
                    Matrix recon = v * evals.asDiagonal() * inv.inverse;
                    double scale = std::max(1e-300, b.norm());
                    if ((recon - b).norm() <= 1e-8 * scale) {
                        DiagonalizationResult res;
                        res.p = std::move(v);
                        res.eigenvalues = std::move(evals);
                        res.e = std::move(e_total);
                        res.e_norm = res.e.norm();
                        res.kappa = inv.kappa;
                        return res;
                    }
                } catch (const std::invalid_argument&) {
                    // ill-conditioned eigenbasis; fall through to perturb
                }
            }
        }
        if (attempt == 10) break;
        // distinct magnitudes + random phases, rescaled to exactly `spread`
        Vector diag(d);
        for (int i = 0; i < d; ++i)
            diag(i) = std::polar(double(i + 1), angle(rng));
        diag *= spread / diag.norm();
        Matrix step = Matrix(diag.asDiagonal());
        e_total += step;
        spread /= 2.0;
    }
    throw std::runtime_error(
        "approx_diagonalize: no well-separated eigenbasis after retries; "
        "smallest achieved eigenvalue gap " + std::to_string(best_gap));
}

Matrix jordan_block(int k, Complex lambda) {
    Matrix j = Matrix::Zero(k, k);
    j.diagonal().setConstant(lambda);
    for (int i = 0; i + 1 < k; ++i) j(i, i + 1) = 1.0;
    return j;
}

Matrix perturb_jordan_nonzero(int k, Complex lambda, double eps, uint64_t seed) {
    if (std::abs(lambda) == 0.0)
        throw std::invalid_argument("perturb_jordan_nonzero: eigenvalue must be nonzero");
    if (eps <= 0) throw std::invalid_argument("perturb_jordan_nonzero: eps must be positive");
    auto rng = make_stream(seed, "jordan-nonzero");
    std::uniform_real_distribution<double> unif(0.5, 1.0);
    const double u = unif(rng);
    Matrix d = Matrix::Zero(k, k);
    // entries -c_j * lambda, c_j distinct in (0, eps]
    for (int j = 0; j < k; ++j) d(j, j) = -(eps * u * double(j + 1) / k) * lambda;
    return d;
}

Matrix perturb_jordan_zero(int d, double eps, double r, uint64_t seed) {
    if (eps <= 0 || r <= 0 || r >= 1)
        throw std::invalid_argument("perturb_jordan_zero: need eps > 0 and 0 < r < 1");
    const double delta = std::min(r / 2.0, std::pow(r / 2.0, d) * eps / d);
    auto rng = make_stream(seed, "jordan-zero");
    std::uniform_real_distribution<double> unif(0.5, 1.0);
    const double u = unif(rng);
    Matrix out = Matrix::Zero(d, d);
    for (int j = 0; j < d; ++j) out(j, j) = delta * u * double(j + 1) / d;
    return out;
}

bool is_nilpotent(const Matrix& a) {
    const int d = static_cast<int>(a.rows());
    double norm_pow = std::pow(a.norm(), d);
    return matrix_power(a, d).norm() <= 1e-12 * std::max(1.0, norm_pow);
}

std::vector<PowerErrorReport> power_error_sweep(const Matrix& a, const Matrix& e,
                                                int n_max, double r, double eps) {
    if (a.rows() != e.rows() || a.cols() != e.cols())
        throw std::invalid_argument("power_error_sweep: dimension mismatch");
    const bool nil = is_nilpotent(a);
    const int d = static_cast<int>(a.rows());
    Matrix an = Matrix::Identity(d, d);
    Matrix bn = Matrix::Identity(d, d);
    const Matrix b = a + e;
    std::vector<PowerErrorReport> out;
    out.reserve(n_max + 1);
    for (int n = 0; n <= n_max; ++n) {
        PowerErrorReport rep;
        rep.n = n;
        rep.abs_err = (bn - an).norm();
        double na = an.norm();
        rep.rel_err = na > 0 ? rep.abs_err / na : std::numeric_limits<double>::quiet_NaN();
        rep.nilpotent_branch = nil;
        const double slack = 1e-9;  // fp slack on a mathematically tight bound
        if (nil) {
            rep.bound = std::pow(r, n) * eps;
            rep.violated = rep.abs_err > rep.bound * (1 + slack) + 1e-15;
        } else {
            rep.bound = double(n) * eps;
            rep.violated = na > 0 && rep.rel_err > rep.bound * (1 + slack) + 1e-15;
        }
        out.push_back(rep);
        an = an * a;
        bn = bn * b;
    }
    return out;
}

// --- simultaneous triangularization ---

namespace {

// Unit vector v with A_i v ~ lambda_i v for every member of the family.
// Deflates through the geometric eigenspace of the first non-scalar matrix.
Vector common_eigenvector(const std::vector<Matrix>& mats) {
    const int d = static_cast<int>(mats[0].rows());
    if (d == 1) return Vector::Ones(1);

    int pick = -1;
    for (size_t i = 0; i < mats.size(); ++i) {
        Complex mean = mats[i].trace() / double(d);
        Matrix dev = mats[i] - mean * Matrix::Identity(d, d);
        if (dev.norm() > 1e-10 * (1.0 + mats[i].norm())) {
            pick = static_cast<int>(i);
            break;
        }
    }
    if (pick < 0) return Vector::Unit(d, 0);  // whole family ~ scalar

    const Matrix& a = mats[pick];
    Eigen::ComplexEigenSolver<Matrix> ces(a, false);
    Vector evals = ces.eigenvalues();
    // deterministic eigenvalue choice: lexicographic (re, im) minimum
    int best = 0;
    for (int i = 1; i < d; ++i) {
        Complex x = evals(i), y = evals(best);
        if (x.real() < y.real() ||
            (x.real() == y.real() && x.imag() < y.imag()))
            best = i;
    }
    Complex lambda0 = evals(best);
    double scale = 1.0 + evals.cwiseAbs().maxCoeff();

    Eigen::JacobiSVD<Matrix> svd(a - lambda0 * Matrix::Identity(d, d),
                                 Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    int s = 0;
    for (int i = 0; i < d; ++i)
        if (sv(i) <= 1e-7 * scale) ++s;
    if (s == 0) s = 1;  // take the smallest singular direction regardless
    if (s >= d) s = d - 1;
    Matrix v = svd.matrixV().rightCols(s);  // orthonormal kernel basis

    std::vector<Matrix> restricted;
    restricted.reserve(mats.size());
    for (const auto& m : mats) restricted.push_back(v.adjoint() * m * v);
    Vector y = common_eigenvector(restricted);
    Vector out = v * y;
    return out / out.norm();
}

}  // namespace

TriangularizationResult simultaneous_triangularize(const std::vector<Matrix>& mats,
                                                   double tol) {
    if (mats.empty())
        throw std::invalid_argument("simultaneous_triangularize: empty family");
    const int d = static_cast<int>(mats[0].rows());
    for (const auto& m : mats)
        if (m.rows() != d || m.cols() != d)
            throw std::invalid_argument("simultaneous_triangularize: dimension mismatch");
    for (size_t i = 0; i < mats.size(); ++i)
        for (size_t j = i + 1; j < mats.size(); ++j)
            if ((mats[i] * mats[j] - mats[j] * mats[i]).norm() > tol)
                throw std::invalid_argument(
                    "simultaneous_triangularize: commutation defect exceeds tolerance");

    bool already = true;
    for (const auto& m : mats) already = already && upper_triangular_within(m, 1e-12);
    if (already) return {Matrix::Identity(d, d), mats};

    std::vector<Matrix> work = mats;
    Matrix q_total = Matrix::Identity(d, d);
    for (int t = 0; t + 1 < d; ++t) {
        const int s = d - t;
        std::vector<Matrix> subs;
        subs.reserve(work.size());
        for (const auto& m : work) subs.push_back(m.bottomRightCorner(s, s));
        Vector v = common_eigenvector(subs);
        for (const auto& m : subs) {
            Vector w = m * v;
            Complex lam = (v.adjoint() * w).value();
            if ((w - lam * v).norm() > 1e-7 * (1.0 + m.norm()))
                throw std::runtime_error(
                    "simultaneous_triangularize: no common eigenvector within "
                    "tolerance (inputs too far from commuting)");
        }
        Eigen::HouseholderQR<Matrix> qr(v);
        Matrix u_sub = qr.householderQ();
        Matrix u = Matrix::Identity(d, d);
        u.bottomRightCorner(s, s) = u_sub;
        for (auto& m : work) m = u.adjoint() * m * u;
        q_total = q_total * u;
    }

    for (const auto& m : work)
        if (!upper_triangular_within(m, 1e-8))
            throw std::runtime_error(
                "simultaneous_triangularize: residual below-diagonal mass too large");
    return {q_total.adjoint(), std::move(work)};
}

WeightedAutomaton unary_section(const WeightedAutomaton& m, int q,
                                const std::string& a, int r) {
    if (q > r) throw std::invalid_argument("unary_section: need q <= r");
    if (q < 0 || r >= m.d) throw std::invalid_argument("unary_section: state out of range");
    const Matrix& mu = m.mu_of(a);
    if (!upper_triangular_within(mu, 1e-8))
        throw std::invalid_argument("unary_section: automaton must be upper triangular");
    const int span = r - q + 1;
    RowVector lambda = RowVector::Zero(span);
    lambda(0) = 1.0;
    Vector rho = Vector::Zero(span);
    rho(span - 1) = 1.0;
    return WeightedAutomaton::create({a}, std::move(lambda),
                                     {mu.block(q, q, span, span)}, std::move(rho),
                                     AutomatonKind::Multiset, kInf);
}

WeightedAutomaton make_asd(const WeightedAutomaton& m, double tol, bool prune) {
    if (commutation_defect(m) > tol)
        throw std::invalid_argument("make_asd: commutation defect exceeds tolerance");

    std::vector<std::string> alphabet = m.alphabet;
    std::sort(alphabet.begin(), alphabet.end());
    const int nsym = static_cast<int>(alphabet.size());
    if (nsym == 0) throw std::invalid_argument("make_asd: empty alphabet");
    const int d = m.d;

    // establish the upper-triangular precondition
    WeightedAutomaton work = m;
    bool triangular = true;
    for (const auto& t : m.mu) triangular = triangular && upper_triangular_within(t, 1e-12);
    if (!triangular) {
        auto tri = simultaneous_triangularize(m.mu, tol);
        work = change_of_basis(m, tri.p);
        for (auto& t : work.mu)
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < i; ++j) t(i, j) = 0.0;  // drop ~1e-8 residue
    }

    auto section = [&](int q, int sym, int r) {
        return unary_section(work, q, alphabet[sym], r);
    };

    WeightedAutomaton result;
    bool have_result = false;
    // nondecreasing q_0 <= ... <= q_nsym over {0..d-1}, lexicographic
    std::vector<int> seq(nsym + 1, 0);
    while (true) {
        bool keep = !prune || (work.lambda(seq.front()) != Complex(0.0) &&
                               work.rho(seq.back()) != Complex(0.0));
        if (keep) {
            WeightedAutomaton term = section(seq[0], 0, seq[1]);
            for (int i = 1; i < nsym; ++i)
                term = shuffle(term, section(seq[i], i, seq[i + 1]), true);
            term = pad_alphabet(term, alphabet);
            term = scale(term, work.lambda(seq.front()), ScaleSide::Initial);
            term = scale(term, work.rho(seq.back()), ScaleSide::Final);
            result = have_result ? direct_sum(result, term, false) : std::move(term);
            have_result = true;
        }
        // next nondecreasing sequence
        int pos = nsym;
        while (pos >= 0 && seq[pos] == d - 1) --pos;
        if (pos < 0) break;
        int v = seq[pos] + 1;
        for (int i = pos; i <= nsym; ++i) seq[i] = v;
    }
    if (!have_result) {
        // everything pruned: the zero automaton
        RowVector lambda = RowVector::Zero(1);
        Vector rho = Vector::Zero(1);
        std::vector<Matrix> mu(nsym, Matrix::Zero(1, 1));
        return WeightedAutomaton::create(alphabet, lambda, mu, rho,
                                         AutomatonKind::Multiset, kInf);
    }
    return result;
}

unsigned long long asd_state_count(int m, int d) {
    if (m < 1 || d < 1) throw std::invalid_argument("asd_state_count: need m, d >= 1");
    const int n = 2 * m + d;
    const int k = d - 1;
    unsigned __int128 res = 1;
    for (int i = 1; i <= k; ++i) {
        res = res * static_cast<unsigned>(n - k + i);
        res /= static_cast<unsigned>(i);
        if (res > std::numeric_limits<unsigned long long>::max())
            throw std::overflow_error("asd_state_count: result exceeds 64 bits");
    }
    return static_cast<unsigned long long>(res);
}

}  // namespace msa
