#include "msa/posenc.hpp"

#include <cmath>
#include <limits>

namespace msa {

Eigen::VectorXd sinusoidal_encoding(long p, int d) {
    if (d <= 0 || d % 2 != 0)
        throw std::invalid_argument("sinusoidal_encoding: d must be a positive even number");
    if (p < 1) throw std::invalid_argument("sinusoidal_encoding: position must be >= 1");
    Eigen::VectorXd e(d);
    for (int j = 1; j <= d / 2; ++j) {
        double freq = std::pow(10000.0, -2.0 * (j - 1) / d);
        double x = freq * double(p - 1);
        e(2 * j - 2) = std::sin(x);
        e(2 * j - 1) = std::cos(x);
    }
    return e;
}

WeightedAutomaton polar_automaton(const PolarParams& params) {
    const int d = params.dimension();
    if (d == 0) throw std::invalid_argument("polar_automaton: no pairs given");
    RowVector lambda(d);
    Matrix mu = Matrix::Zero(d, d);
    for (size_t i = 0; i < params.pairs.size(); ++i) {
        const auto& p = params.pairs[i];
        const int b = static_cast<int>(2 * i);
        lambda(b) = p.s * std::cos(p.phi);
        lambda(b + 1) = p.s * std::sin(p.phi);
        mu(b, b) = p.r * std::cos(p.theta);
        mu(b, b + 1) = p.r * std::sin(p.theta);
        mu(b + 1, b) = -p.r * std::sin(p.theta);
        mu(b + 1, b + 1) = p.r * std::cos(p.theta);
    }
    Vector rho = Vector::Ones(d);
    return WeightedAutomaton::create({"a"}, std::move(lambda), {std::move(mu)},
                                     std::move(rho), AutomatonKind::Multiset);
}

Eigen::VectorXd polar_forward_weights(const PolarParams& params, long n) {
    const int d = params.dimension();
    Eigen::VectorXd fw(d);
    for (size_t i = 0; i < params.pairs.size(); ++i) {
        const auto& p = params.pairs[i];
        // one 2-vector per rotation block; iterate the block product
        double x = p.s * std::cos(p.phi), y = p.s * std::sin(p.phi);
        const double c = p.r * std::cos(p.theta), s = p.r * std::sin(p.theta);
        for (long t = 0; t < n; ++t) {
            double nx = x * c - y * s;
            double ny = x * s + y * c;
            x = nx;
            y = ny;
        }
        fw(2 * i) = x;
        fw(2 * i + 1) = y;
    }
    return fw;
}

Eigen::VectorXd polar_forward_closed_form(const PolarParams& params, long n) {
    const int d = params.dimension();
    constexpr double two_pi = 2.0 * M_PI;
    Eigen::VectorXd fw(d);
    for (size_t i = 0; i < params.pairs.size(); ++i) {
        const auto& p = params.pairs[i];
        double angle = std::fmod(p.phi + double(n) * p.theta, two_pi);
        double mag = p.s * std::pow(p.r, double(n));
        fw(2 * i) = mag * std::cos(angle);
        fw(2 * i + 1) = mag * std::sin(angle);
    }
    return fw;
}

PolarParams transformer_params(int d) {
    if (d <= 0 || d % 2 != 0)
        throw std::invalid_argument("transformer_params: d must be a positive even number");
    PolarParams params;
    for (int j = 1; j <= d / 2; ++j) {
        PolarPair p;
        p.s = 1.0;
        p.phi = M_PI / 2.0;
        p.r = 1.0;
        p.theta = -std::pow(10000.0, -2.0 * (j - 1) / d);
        params.pairs.push_back(p);
    }
    return params;
}

WeightedAutomaton complex_pairs_to_real(const DiagonalAutomaton& m,
                                        double pair_tol) {
    const int d = m.d;
    const Vector& z = m.diag.at(0);
    if (m.alphabet.size() != 1)
        throw std::invalid_argument("complex_pairs_to_real: automaton must be unary");

    std::vector<bool> used(d, false);
    std::vector<std::pair<int, int>> pairs;  // (j, k) with entry_k ~ conj(entry_j)
    std::vector<int> singles;
    for (int j = 0; j < d; ++j) {
        if (used[j]) continue;
        used[j] = true;
        if (std::abs(z(j).imag()) <= pair_tol &&
            std::abs(m.lambda(j).imag()) <= pair_tol &&
            std::abs(m.rho(j).imag()) <= pair_tol) {
            singles.push_back(j);
            continue;
        }
        int match = -1;
        for (int k = j + 1; k < d; ++k) {
            if (used[k]) continue;
            if (std::abs(z(k) - std::conj(z(j))) <= pair_tol &&
                std::abs(m.lambda(k) - std::conj(m.lambda(j))) <= pair_tol &&
                std::abs(m.rho(k) - std::conj(m.rho(j))) <= pair_tol) {
                match = k;
                break;
            }
        }
        if (match < 0)
            throw std::invalid_argument(
                "complex_pairs_to_real: unmatched conjugate entry at index " +
                std::to_string(j));
        used[match] = true;
        pairs.emplace_back(j, match);
    }

    RowVector lambda = RowVector::Zero(d);
    Matrix mu = Matrix::Zero(d, d);
    Vector rho = Vector::Zero(d);
    int pos = 0;
    // basis per pair: V = [[1, 1], [i, -i]]; lambda' = lambda V^-1, rho' = V rho
    for (const auto& [j, k] : pairs) {
        lambda(pos) = 0.5 * (m.lambda(j) + m.lambda(k)).real();
        lambda(pos + 1) = (0.5 * Complex(0, 1) * (m.lambda(k) - m.lambda(j))).real();
        mu(pos, pos) = z(j).real();
        mu(pos, pos + 1) = z(j).imag();
        mu(pos + 1, pos) = -z(j).imag();
        mu(pos + 1, pos + 1) = z(j).real();
        rho(pos) = (m.rho(j) + m.rho(k)).real();
        rho(pos + 1) = (Complex(0, 1) * (m.rho(j) - m.rho(k))).real();
        pos += 2;
    }
    for (int j : singles) {
        lambda(pos) = m.lambda(j).real();
        mu(pos, pos) = z(j).real();
        rho(pos) = m.rho(j).real();
        ++pos;
    }
    return WeightedAutomaton::create(m.alphabet, std::move(lambda),
                                     {std::move(mu)}, std::move(rho),
                                     AutomatonKind::Multiset);
}

double posenc_max_deviation(int d, long max_position, bool swap_pairs) {
    PolarParams params = transformer_params(d);
    double worst = 0.0;
    for (long p = 1; p <= max_position; ++p) {
        Eigen::VectorXd fw = polar_forward_weights(params, p - 1);
        Eigen::VectorXd enc = sinusoidal_encoding(p, d);
        if (swap_pairs)
            for (int j = 0; j + 1 < d; j += 2) std::swap(fw(j), fw(j + 1));
        worst = std::max(worst, (fw - enc).cwiseAbs().maxCoeff());
    }
    return worst;
}

}  // namespace msa
