#include "pmc/curvature_spec.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace pmc {

namespace {

double poly_eval(const std::vector<double>& c, double r) {
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * r + *it;
    return acc;
}

double poly_derivative(const std::vector<double>& c, double r) {
    double acc = 0.0;
    for (int i = static_cast<int>(c.size()) - 1; i >= 1; --i) acc = acc * r + i * c[i];
    return acc;
}

}  // namespace

void RadialProfile::prepare() {
    switch (kind) {
        case Kind::power:
            break;
        case Kind::rational:
            if (numerator.empty() || denominator.empty())
                throw SpecError("rational profile needs numerator and denominator coefficients");
            break;
        case Kind::table: {
            if (radii.size() != table_values.size() || radii.size() < 4)
                throw SpecError("tabulated profile needs >= 4 (radius, value) pairs");
            for (std::size_t i = 1; i < radii.size(); ++i)
                if (radii[i] <= radii[i - 1]) throw SpecError("tabulated radii must be increasing");
            // natural cubic spline second derivatives
            const int n = static_cast<int>(radii.size());
            spline_m.assign(n, 0.0);
            std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), d(n, 0.0);
            b[0] = b[n - 1] = 1.0;
            for (int i = 1; i < n - 1; ++i) {
                const double hl = radii[i] - radii[i - 1];
                const double hr = radii[i + 1] - radii[i];
                a[i] = hl;
                b[i] = 2.0 * (hl + hr);
                c[i] = hr;
                d[i] = 6.0 * ((table_values[i + 1] - table_values[i]) / hr -
                              (table_values[i] - table_values[i - 1]) / hl);
            }
            for (int i = 1; i < n; ++i) {
                const double w = a[i] / b[i - 1];
                b[i] -= w * c[i - 1];
                d[i] -= w * d[i - 1];
            }
            spline_m[n - 1] = d[n - 1] / b[n - 1];
            for (int i = n - 2; i >= 0; --i) spline_m[i] = (d[i] - c[i] * spline_m[i + 1]) / b[i];
            break;
        }
    }
}

double RadialProfile::value(double r) const {
    switch (kind) {
        case Kind::power:
            return coefficient * std::pow(r, exponent);
        case Kind::rational:
            return poly_eval(numerator, r) / poly_eval(denominator, r);
        case Kind::table: {
            const int n = static_cast<int>(radii.size());
            const double rc = std::clamp(r, radii.front(), radii.back());
            int i = static_cast<int>(std::upper_bound(radii.begin(), radii.end(), rc) - radii.begin()) - 1;
            i = std::clamp(i, 0, n - 2);
            const double h = radii[i + 1] - radii[i];
            const double t = (rc - radii[i]) / h;
            const double s = 1.0 - t;
            return s * table_values[i] + t * table_values[i + 1] +
                   h * h / 6.0 * ((s * s * s - s) * spline_m[i] + (t * t * t - t) * spline_m[i + 1]);
        }
    }
    return 0.0;
}

double RadialProfile::derivative(double r) const {
    switch (kind) {
        case Kind::power:
            return coefficient * exponent * std::pow(r, exponent - 1.0);
        case Kind::rational: {
            const double num = poly_eval(numerator, r);
            const double den = poly_eval(denominator, r);
            return (poly_derivative(numerator, r) * den - num * poly_derivative(denominator, r)) /
                   (den * den);
        }
        case Kind::table: {
            const double h = 1e-6 * std::max(1.0, std::abs(r));
            return (value(r + h) - value(r - h)) / (2.0 * h);
        }
    }
    return 0.0;
}

double AngularMode::value(const Eigen::Vector3d& xi, double base_x) const {
    switch (kind) {
        case Kind::fiber_cos:
            return std::cos(k * std::atan2(xi.y(), xi.x()));
        case Kind::fiber_sin:
            return std::sin(k * std::atan2(xi.y(), xi.x()));
        case Kind::harmonic: {
            const double x = xi.x(), y = xi.y(), z = xi.z();
            if (l == 1) {
                if (k == -1) return y;
                if (k == 0) return z;
                return x;
            }
            // l == 2
            switch (k) {
                case -2: return x * y;
                case -1: return y * z;
                case 0: return 0.5 * (3.0 * z * z - 1.0);
                case 1: return z * x;
                default: return x * x - y * y;
            }
        }
        case Kind::base_cos:
            return std::cos(k * base_x);
        case Kind::base_sin:
            return std::sin(k * base_x);
    }
    return 0.0;
}

CurvatureSpec::CurvatureSpec(RadialProfile profile, std::vector<AngularMode> modes, double r_low,
                             double r_high)
    : profile_(std::move(profile)), modes_(std::move(modes)), r_low_(r_low), r_high_(r_high) {
    if (!(r_low_ > 0.0) || !(r_high_ > r_low_)) throw SpecError("invalid working annulus");
    profile_.prepare();
    for (const auto& mode : modes_) {
        if (mode.kind == AngularMode::Kind::harmonic && (mode.l < 1 || mode.l > 2 || std::abs(mode.k) > mode.l))
            throw SpecError("harmonic mode must have degree l in {1,2} and |k| <= l");
    }
    // positivity validated by sampling the annulus
    const auto dirs = growth_directions(3, 1, 48, 6);
    for (int i = 0; i <= 96; ++i) {
        const double rho = r_low_ * std::pow(r_high_ / r_low_, i / 96.0);
        for (const auto& [xi, bx] : dirs) {
            const double prof = profile_.value(rho);
            const double k = prof * angular_factor(xi, bx);
            if (!(k > 0.0) || !std::isfinite(k)) {
                std::ostringstream msg;
                msg << "prescribed function is not strictly positive on the working annulus "
                    << "(K = " << k << " at rho = " << rho << ")";
                throw SpecError(msg.str());
            }
        }
    }
}

double CurvatureSpec::angular_factor(const Eigen::Vector3d& xi, double base_x) const {
    double acc = 1.0;
    for (const auto& mode : modes_) acc += mode.amplitude * mode.value(xi, base_x);
    return acc;
}

double CurvatureSpec::eval(double rho, const Eigen::Vector3d& xi, double base_x) const {
    if (!(rho >= r_low_ && rho <= r_high_)) {
        std::ostringstream msg;
        msg << "radius " << rho << " outside the validated annulus [" << r_low_ << ", " << r_high_ << "]";
        throw AnnulusError(msg.str());
    }
    const double k = profile_.value(rho) * angular_factor(xi, base_x);
    if (!(k > 0.0)) throw SpecError("prescribed function evaluated non-positive");
    return k;
}

double CurvatureSpec::radial_derivative(double rho, const Eigen::Vector3d& xi, double base_x) const {
    if (!(rho >= r_low_ && rho <= r_high_)) {
        std::ostringstream msg;
        msg << "radius " << rho << " outside the validated annulus [" << r_low_ << ", " << r_high_ << "]";
        throw AnnulusError(msg.str());
    }
    // d/drho [rho * prof(rho)] * angular factor
    const double d = profile_.value(rho) + rho * profile_.derivative(rho);
    return d * angular_factor(xi, base_x);
}

bool CurvatureSpec::has_base_modes() const {
    for (const auto& mode : modes_)
        if ((mode.kind == AngularMode::Kind::base_cos || mode.kind == AngularMode::Kind::base_sin) &&
            mode.amplitude != 0.0)
            return true;
    return false;
}

double CurvatureSpec::horizontal_gradient_max(
    const std::vector<std::pair<Eigen::Vector3d, double>>& dirs, int radial_samples) const {
    double worst = 0.0;
    const double dx = 1e-5;
    for (int i = 0; i <= radial_samples; ++i) {
        const double rho = r_low_ * std::pow(r_high_ / r_low_, double(i) / radial_samples);
        for (const auto& [xi, bx] : dirs) {
            const double kp = profile_.value(rho) * angular_factor(xi, bx + dx);
            const double km = profile_.value(rho) * angular_factor(xi, bx - dx);
            worst = std::max(worst, std::abs(kp - km) / (2.0 * dx));
        }
    }
    return worst;
}

std::vector<std::pair<Eigen::Vector3d, double>> growth_directions(int m, int n, int fiber_samples,
                                                                  int base_samples) {
    std::vector<Eigen::Vector3d> xs;
    if (m == 2) {
        for (int i = 0; i < fiber_samples; ++i) {
            const double th = 2.0 * std::numbers::pi * i / fiber_samples;
            xs.emplace_back(std::cos(th), std::sin(th), 0.0);
        }
    } else {
        // Fibonacci sphere sample
        const double ga = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (int i = 0; i < fiber_samples; ++i) {
            const double z = 1.0 - (2.0 * i + 1.0) / fiber_samples;
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            xs.emplace_back(r * std::cos(ga * i), r * std::sin(ga * i), z);
        }
    }
    std::vector<std::pair<Eigen::Vector3d, double>> dirs;
    const int nb = n == 0 ? 1 : base_samples;
    for (int b = 0; b < nb; ++b) {
        const double bx = 2.0 * std::numbers::pi * b / nb;
        for (const auto& xi : xs) dirs.emplace_back(xi, bx);
    }
    return dirs;
}

namespace {

// First sign change of g(rho) = rho K - (m-1) scanned on a log grid, bisected
// to 1e-12.
struct Crossing {
    bool starts_positive = false, ends_negative = false;
    double first = 0.0, last = 0.0;  // first +to- crossing, last crossing
    bool found = false;
};

Crossing scan_direction(const CurvatureSpec& spec, int m, const Eigen::Vector3d& xi, double bx) {
    constexpr int kScan = 512;
    const double lo = spec.r_low(), hi = spec.r_high();
    auto g = [&](double rho) { return rho * spec.eval(rho, xi, bx) - (m - 1); };

    Crossing out;
    double prev_rho = lo, prev_g = g(lo);
    out.starts_positive = prev_g > 0.0;
    for (int i = 1; i <= kScan; ++i) {
        const double rho = lo * std::pow(hi / lo, double(i) / kScan);
        const double gi = g(rho);
        if ((prev_g > 0.0) != (gi > 0.0)) {
            double a = prev_rho, b = rho;
            while (b - a > 1e-12) {
                const double mid = 0.5 * (a + b);
                if ((g(mid) > 0.0) == (prev_g > 0.0))
                    a = mid;
                else
                    b = mid;
            }
            const double cross = 0.5 * (a + b);
            if (!out.found) out.first = cross;
            out.last = cross;
            out.found = true;
        }
        prev_rho = rho;
        prev_g = gi;
    }
    out.ends_negative = prev_g < 0.0;
    return out;
}

}  // namespace

GrowthReport check_growth(const CurvatureSpec& spec, int m,
                          const std::vector<std::pair<Eigen::Vector3d, double>>& dirs) {
    GrowthReport report;
    double r1 = spec.r_high(), r2 = spec.r_low();
    bool ok = true;
    std::ostringstream diag;
    for (const auto& [xi, bx] : dirs) {
        const Crossing c = scan_direction(spec, m, xi, bx);
        if (!c.starts_positive || !c.ends_negative || !c.found) {
            ok = false;
            if (diag.tellp() == 0) {
                diag << "no +to- sign change of rho*K-(m-1) along direction (" << xi.transpose() << ")";
                if (!c.starts_positive) diag << "; not positive at r_low";
                if (!c.ends_negative) diag << "; not negative at r_high";
            }
            continue;
        }
        r1 = std::min(r1, c.first);
        r2 = std::max(r2, c.last);
    }
    report.satisfied = ok;
    if (!ok) {
        report.diagnostic = diag.str();
        r1 = spec.r_low();
        r2 = spec.r_high();
    }
    report.r1 = ok ? r1 : 0.0;
    report.r2 = ok ? r2 : 0.0;

    // alpha of the gradient-estimate hypothesis and the monotonicity flag,
    // approximated on a directions x 256 radii tensor sample of [r1, r2]
    // (whole annulus when no crossing exists).
    constexpr int kRad = 256;
    double alpha = 0.0, max_k = 0.0, worst_slope = -1e300;
    for (int i = 0; i <= kRad; ++i) {
        const double rho = r1 + (r2 - r1) * double(i) / kRad;
        for (const auto& [xi, bx] : dirs) {
            const double slope = spec.radial_derivative(rho, xi, bx);
            alpha = std::max(alpha, 2.0 * std::abs(rho * slope));
            worst_slope = std::max(worst_slope, slope);
            max_k = std::max(max_k, spec.eval(rho, xi, bx));
        }
        if (r2 == r1) break;
    }
    report.alpha = alpha;
    report.max_k = max_k;
    report.monotone_on_annulus = worst_slope <= 1e-10;
    return report;
}

GrowthReport check_growth(const CurvatureSpec& spec, int m, int n) {
    return check_growth(spec, m, growth_directions(m, n));
}

}  // namespace pmc
