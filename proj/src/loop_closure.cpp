#include "odomap/loop_closure.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace odomap {

double OrientationProfile::value_at(double x) const {
    const auto* begin = arclengths.data();
    const auto* end = begin + arclengths.size();
    // Largest i with l_i <= x; constant value of the segment starting at i.
    const auto* it = std::upper_bound(begin, end, x);
    if (it == begin) return orientations(0);
    const Eigen::Index i = static_cast<Eigen::Index>(it - begin) - 1;
    return orientations(i);
}

OrientationProfile build_orientation_profile(const std::vector<Pose2d>& poses) {
    if (poses.size() < 2) {
        throw std::invalid_argument("build_orientation_profile: need at least 2 poses");
    }
    const auto n = static_cast<Eigen::Index>(poses.size());
    OrientationProfile profile;
    profile.arclengths.resize(n);
    profile.orientations.resize(n);
    profile.arclengths(0) = 0.0;
    profile.orientations(0) = poses[0].phi;
    for (Eigen::Index i = 1; i < n; ++i) {
        const auto& prev = poses[static_cast<std::size_t>(i - 1)];
        const auto& cur = poses[static_cast<std::size_t>(i)];
        const double step = (cur.position() - prev.position()).norm();
        if (step <= 0.0) {
            throw std::invalid_argument("build_orientation_profile: coincident poses");
        }
        profile.arclengths(i) = profile.arclengths(i - 1) + step;
        profile.orientations(i) = profile.orientations(i - 1) + wrap_angle(cur.phi - prev.phi);
    }
    return profile;
}

bool window_comparable(const OrientationProfile& profile, Eigen::Index i,
                       const CorrelationConfig& cfg) {
    const double l = profile.arclengths(i);
    return l - cfg.neighborhood >= 0.0 && l + cfg.neighborhood <= profile.length();
}

Eigen::VectorXd neighborhood_vector(const OrientationProfile& profile, Eigen::Index i,
                                    const CorrelationConfig& cfg) {
    cfg.validate();
    if (!window_comparable(profile, i, cfg)) {
        throw std::invalid_argument("neighborhood_vector: window leaves the profile domain");
    }
    Eigen::VectorXd v(cfg.samples);
    const double step = 2.0 * cfg.neighborhood / (cfg.samples - 1);
    const double center = (cfg.samples - 1) / 2.0;
    for (int k = 0; k < cfg.samples; ++k) {
        // Offsets are centered so an odd sample count hits x = 0 exactly.
        v(k) = profile.grounded_at(i, (k - center) * step);
    }
    return v;
}

Eigen::MatrixXd correlation_matrix(const OrientationProfile& profile,
                                   const CorrelationConfig& cfg) {
    cfg.validate();
    const Eigen::Index n = profile.size();
    Eigen::MatrixXd c = Eigen::MatrixXd::Constant(n, n, kNotComparable);

    std::vector<Eigen::Index> comparable;
    comparable.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        if (window_comparable(profile, i, cfg)) comparable.push_back(i);
    }
    if (comparable.empty()) return c;

    Eigen::MatrixXd windows(static_cast<Eigen::Index>(comparable.size()), cfg.samples);
    for (std::size_t r = 0; r < comparable.size(); ++r) {
        windows.row(static_cast<Eigen::Index>(r)) = neighborhood_vector(profile, comparable[r], cfg);
    }

    const double inv_m = 1.0 / cfg.samples;
    for (std::size_t a = 0; a < comparable.size(); ++a) {
        c(comparable[a], comparable[a]) = 0.0;
        for (std::size_t b = a + 1; b < comparable.size(); ++b) {
            const double value =
                (windows.row(static_cast<Eigen::Index>(a)) - windows.row(static_cast<Eigen::Index>(b)))
                    .squaredNorm() *
                inv_m;
            c(comparable[a], comparable[b]) = value;
            c(comparable[b], comparable[a]) = value;
        }
    }
    return c;
}

LoopPairSet detect_loop_pairs(const Eigen::MatrixXd& correlation,
                              const OrientationProfile& profile,
                              const CorrelationConfig& cfg) {
    cfg.validate();
    const Eigen::Index n = correlation.rows();
    if (correlation.cols() != n || profile.size() != n) {
        throw std::invalid_argument("detect_loop_pairs: matrix/profile size mismatch");
    }
    LoopPairSet out;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double value = correlation(i, j);
            if (!(value < cfg.threshold)) continue;
            if (std::abs(profile.arclengths(j) - profile.arclengths(i)) < cfg.neighborhood) {
                continue;
            }
            bool minimal = true;
            for (Eigen::Index di = -1; di <= 1 && minimal; ++di) {
                for (Eigen::Index dj = -1; dj <= 1; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    const Eigen::Index a = i + di;
                    const Eigen::Index b = j + dj;
                    if (a < 0 || b < 0 || a >= n || b >= n) continue;
                    if (correlation(a, b) < value) {
                        minimal = false;
                        break;
                    }
                }
            }
            if (minimal) out.pairs.push_back({i, j, value});
        }
    }
    return out;
}

double estimate_lap_length(const OrientationProfile& profile) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const Eigen::Index n = profile.size();
    const double direction = profile.orientations(n - 1) >= profile.orientations(0) ? 1.0 : -1.0;
    std::vector<double> gaps;
    Eigen::Index j = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (j < i) j = i;
        while (j < n &&
               direction * (profile.orientations(j) - profile.orientations(i)) < two_pi) {
            ++j;
        }
        if (j >= n) break;
        gaps.push_back(profile.arclengths(j) - profile.arclengths(i));
    }
    if (gaps.empty()) return 0.0;
    std::nth_element(gaps.begin(), gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2),
                     gaps.end());
    return gaps[gaps.size() / 2];
}

LoopPairSet filter_full_turn_pairs(const LoopPairSet& pairs, const OrientationProfile& profile,
                                   double turn_tolerance, bool* applied) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const double lap_length = estimate_lap_length(profile);
    if (lap_length <= 0.0) {
        // Path never comes around; whole turns are meaningless here.
        if (applied) *applied = false;
        return pairs;
    }

    // A true revisit spans whole lap lengths and whole turns. Shape matches
    // between distinct corners of a symmetric boundary fail the separation
    // test; pairs dragged off a whole turn by heading drift still cluster,
    // so the median per-lap residual recovers the shared drift.
    std::vector<double> residuals;
    std::vector<std::size_t> candidates;
    for (std::size_t k = 0; k < pairs.pairs.size(); ++k) {
        const auto& p = pairs.pairs[k];
        const double separation = profile.arclengths(p.j) - profile.arclengths(p.i);
        const double laps = std::round(separation / lap_length);
        if (laps < 1.0) continue;
        if (std::abs(separation - laps * lap_length) > 0.2 * lap_length) continue;
        const double turn = std::abs(profile.orientations(p.j) - profile.orientations(p.i));
        residuals.push_back((turn - laps * two_pi) / laps);
        candidates.push_back(k);
    }
    if (candidates.empty()) {
        if (applied) *applied = false;
        return pairs;
    }
    std::vector<double> sorted = residuals;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2),
                     sorted.end());
    const double drift = sorted[sorted.size() / 2];

    LoopPairSet out;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        if (std::abs(residuals[k] - drift) <= turn_tolerance) {
            out.pairs.push_back(pairs.pairs[candidates[k]]);
        }
    }
    if (applied) *applied = true;
    return out;
}

void save_correlation_csv(const Eigen::MatrixXd& correlation, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error(file.string() + ": cannot write correlation matrix");
    char buf[40];
    for (Eigen::Index i = 0; i < correlation.rows(); ++i) {
        for (Eigen::Index j = 0; j < correlation.cols(); ++j) {
            if (j) out << ',';
            if (std::isinf(correlation(i, j))) {
                out << "inf";
            } else {
                std::snprintf(buf, sizeof(buf), "%.9g", correlation(i, j));
                out << buf;
            }
        }
        out << '\n';
    }
}

}  // namespace odomap
