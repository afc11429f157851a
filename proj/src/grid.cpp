#include "dflab/grid.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace dflab {

/// Per interval: partial[g*nq+j] integrates l_j(s) w(s) between x_g and the
/// interval edge (inward: from the left edge; outward: to the right edge);
/// full[j] integrates over the whole interval.
struct RadialGrid::MomentTables {
    std::vector<double> partial; // n_intervals * nq * nq
    std::vector<double> full;    // n_intervals * nq
};

struct RadialGrid::MomentCache {
    std::mutex mutex;
    std::map<std::pair<bool, int>, MomentTables> tables;
};

RadialGrid::RadialGrid(std::vector<double> breakpoints, int points_per_interval)
    : breaks_(std::move(breakpoints)), nq_(points_per_interval) {
    if (breaks_.size() < 2) throw std::invalid_argument("RadialGrid: need >= 2 breakpoints");
    for (size_t i = 1; i < breaks_.size(); ++i)
        if (!(breaks_[i] > breaks_[i - 1]))
            throw std::invalid_argument("RadialGrid: breakpoints not strictly increasing");
    rule_ = gauss_legendre(nq_);
    const int niv = n_intervals();
    x_.resize(static_cast<size_t>(niv) * nq_);
    w_.resize(x_.size());
    for (int iv = 0; iv < niv; ++iv) {
        const double mid = 0.5 * (breaks_[iv] + breaks_[iv + 1]);
        const double half = 0.5 * (breaks_[iv + 1] - breaks_[iv]);
        for (int q = 0; q < nq_; ++q) {
            x_[iv * nq_ + q] = mid + half * rule_.nodes[q];
            w_[iv * nq_ + q] = half * rule_.weights[q];
        }
    }
    mcache_ = std::make_shared<MomentCache>();
}

double RadialGrid::integrate(std::span<const double> f) const {
    double s = 0.0;
    for (size_t g = 0; g < w_.size(); ++g) s += w_[g] * f[g];
    return s;
}

std::vector<double> RadialGrid::cumulative_inward(std::span<const double> f) const {
    const int niv = n_intervals();
    std::vector<double> out(x_.size());
    double prefix = 0.0;
    for (int iv = 0; iv < niv; ++iv) {
        const double half = 0.5 * (breaks_[iv + 1] - breaks_[iv]);
        double full = 0.0;
        for (int q = 0; q < nq_; ++q) {
            double partial = 0.0;
            for (int j = 0; j < nq_; ++j) partial += rule_.partial_at(q, j) * f[iv * nq_ + j];
            out[iv * nq_ + q] = prefix + half * partial;
            full += w_[iv * nq_ + q] * f[iv * nq_ + q];
        }
        prefix += full;
    }
    return out;
}

std::vector<double> RadialGrid::cumulative_outward(std::span<const double> f) const {
    std::vector<double> in = cumulative_inward(f);
    const double total = integrate(f);
    for (auto& v : in) v = total - v;
    return in;
}

namespace {

// integral of f over [lo, hi] with a 24-point Gauss rule, geometric panels
// toward lo for integrands with a negative-power factor
template <typename F>
double panel_gauss(const F& f, double lo, double hi, bool geometric) {
    static const GaussRule rule = gauss_legendre(24);
    double total = 0.0;
    double cur_hi = hi;
    int guard = 0;
    while (true) {
        double cur_lo = geometric ? std::max(lo, cur_hi / 1.6) : lo;
        if (!geometric || cur_lo <= lo * 1.0000001 || ++guard > 200) cur_lo = lo;
        const double mid = 0.5 * (cur_lo + cur_hi), half = 0.5 * (cur_hi - cur_lo);
        double s = 0.0;
        for (int q = 0; q < 24; ++q) s += rule.weights[q] * f(mid + half * rule.nodes[q]);
        total += half * s;
        if (cur_lo <= lo) break;
        cur_hi = cur_lo;
    }
    return total;
}

} // namespace

const RadialGrid::MomentTables& RadialGrid::moments(bool outward, int power) const {
    std::lock_guard<std::mutex> lock(mcache_->mutex);
    auto key = std::make_pair(outward, power);
    auto it = mcache_->tables.find(key);
    if (it != mcache_->tables.end()) return it->second;

    const int niv = n_intervals();
    MomentTables t;
    t.partial.assign(static_cast<size_t>(niv) * nq_ * nq_, 0.0);
    t.full.assign(static_cast<size_t>(niv) * nq_, 0.0);

    // barycentric weights of the reference Gauss nodes
    std::vector<double> bw(nq_, 1.0);
    for (int j = 0; j < nq_; ++j)
        for (int k = 0; k < nq_; ++k)
            if (k != j) bw[j] /= (rule_.nodes[j] - rule_.nodes[k]);

    for (int iv = 0; iv < niv; ++iv) {
        const double a = breaks_[iv], b = breaks_[iv + 1];
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        auto weight = [&](double s) {
            return outward ? std::pow(s, -static_cast<double>(power))
                           : std::pow(s, static_cast<double>(power));
        };
        for (int j = 0; j < nq_; ++j) {
            auto integrand = [&](double s) {
                const double x = (s - mid) / half; // reference coordinate
                // barycentric Lagrange l_j(x)
                double num = 0.0, den = 0.0;
                bool hit = false;
                double lj = 0.0;
                for (int k = 0; k < nq_; ++k) {
                    const double d = x - rule_.nodes[k];
                    if (d == 0.0) {
                        lj = (k == j) ? 1.0 : 0.0;
                        hit = true;
                        break;
                    }
                    const double c = bw[k] / d;
                    den += c;
                    if (k == j) num = c;
                }
                if (!hit) lj = num / den;
                return lj * weight(s);
            };
            for (int g = 0; g < nq_; ++g) {
                const double xg = x_[iv * nq_ + g];
                const double v = outward ? panel_gauss(integrand, xg, b, true)
                                         : panel_gauss(integrand, a, xg, iv == 0 && outward);
                t.partial[(static_cast<size_t>(iv) * nq_ + g) * nq_ + j] = v;
            }
            // whole-interval value; for the outward weight on the first
            // interval the interpolant-based integral from 0 may diverge, but
            // it is never consumed (no point lies left of interval 0)
            if (outward && iv == 0) {
                t.full[static_cast<size_t>(iv) * nq_ + j] = 0.0;
            } else {
                t.full[static_cast<size_t>(iv) * nq_ + j] =
                    panel_gauss(integrand, a, b, outward);
            }
        }
    }
    auto [ins, ok] = mcache_->tables.emplace(key, std::move(t));
    (void)ok;
    return ins->second;
}

std::vector<double> RadialGrid::cumulative_inward_weighted(std::span<const double> t,
                                                           int k) const {
    const auto& mt = moments(false, k);
    const int niv = n_intervals();
    std::vector<double> out(x_.size());
    double prefix = 0.0;
    for (int iv = 0; iv < niv; ++iv) {
        for (int g = 0; g < nq_; ++g) {
            double partial = 0.0;
            for (int j = 0; j < nq_; ++j)
                partial += mt.partial[(static_cast<size_t>(iv) * nq_ + g) * nq_ + j] *
                           t[iv * nq_ + j];
            out[iv * nq_ + g] = prefix + partial;
        }
        double full = 0.0;
        for (int j = 0; j < nq_; ++j)
            full += mt.full[static_cast<size_t>(iv) * nq_ + j] * t[iv * nq_ + j];
        prefix += full;
    }
    return out;
}

std::vector<double> RadialGrid::cumulative_outward_weighted(std::span<const double> t,
                                                            int kp1) const {
    const auto& mt = moments(true, kp1);
    const int niv = n_intervals();
    std::vector<double> out(x_.size());
    double suffix = 0.0;
    for (int iv = niv - 1; iv >= 0; --iv) {
        for (int g = 0; g < nq_; ++g) {
            double partial = 0.0;
            for (int j = 0; j < nq_; ++j)
                partial += mt.partial[(static_cast<size_t>(iv) * nq_ + g) * nq_ + j] *
                           t[iv * nq_ + j];
            out[iv * nq_ + g] = suffix + partial;
        }
        double full = 0.0;
        for (int j = 0; j < nq_; ++j)
            full += mt.full[static_cast<size_t>(iv) * nq_ + j] * t[iv * nq_ + j];
        suffix += full;
    }
    return out;
}

RadialGrid build_grid(int m_nodes, double rbox, GridMapping mapping,
                      double min_radius_covered, int points_per_interval) {
    if (m_nodes < 64) throw std::invalid_argument("build_grid: need at least 64 nodes");
    if (rbox <= min_radius_covered)
        throw std::invalid_argument("build_grid: rbox must exceed the nuclear radius");
    GridMapping m = mapping;
    if (m.b < 0.0 || m.d < 0.0) throw std::invalid_argument("build_grid: mapping parameters must be >= 0");
    if (m.a <= 0.0) {
        // derive a from the box constraint r(1) = rbox
        if (m.b > 0.0) {
            m.a = (rbox - m.d) / std::expm1(m.b);
            if (m.a <= 0.0) throw std::invalid_argument("build_grid: mapping d too large for rbox");
        } else {
            m.a = 0.0;
            m.d = rbox;
        }
    }
    std::vector<double> breaks(m_nodes);
    for (int i = 0; i < m_nodes; ++i) {
        const double t = static_cast<double>(i) / (m_nodes - 1);
        breaks[i] = (m.b > 0.0 ? m.a * std::expm1(m.b * t) : 0.0) + m.d * t;
    }
    breaks.front() = 0.0;
    breaks.back() = (m.b > 0.0 ? m.a * std::expm1(m.b) : 0.0) + m.d;
    RadialGrid g(std::move(breaks), points_per_interval);
    g.map_ = m;
    return g;
}

} // namespace dflab
