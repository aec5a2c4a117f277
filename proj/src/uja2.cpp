#include "qnkit/uja2.hpp"

#include "qnkit/error.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace qnkit {

namespace {

// 1 + (K(K-1) E20 + L(L-1) E02 + 2KL E11) / (2M(M+1))
double first_order_bracket(const TwoClassMoments& m, int k, int l)
{
    const double kk = k;
    const double ll = l;
    const double mm = m.stations;
    return 1.0 + (kk * (kk - 1.0) * m.e20 + ll * (ll - 1.0) * m.e02 + 2.0 * kk * ll * m.e11) / (2.0 * mm * (mm + 1.0));
}

void require_positive(double bracket, int k, int l)
{
    if (!(bracket > 0.0)) {
        std::ostringstream msg;
        msg << "series divergence: two-class first-order bracket not positive at (" << k << ", " << l << ")";
        throw NumericError(msg.str());
    }
}

} // namespace

TwoClassMoments two_class_moments(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.empty() || x.size() != y.size()) {
        throw ModelError("two-class demands need one (X, Y) pair per station");
    }
    for (std::size_t n = 0; n < x.size(); ++n) {
        if (!(x[n] > 0.0) || !(y[n] > 0.0)) {
            throw ModelError("two-class demands must be positive");
        }
    }
    TwoClassMoments m;
    m.stations = static_cast<int>(x.size());
    m.mean_x = std::accumulate(x.begin(), x.end(), 0.0) / m.stations;
    m.mean_y = std::accumulate(y.begin(), y.end(), 0.0) / m.stations;
    for (std::size_t n = 0; n < x.size(); ++n) {
        const double ex = (x[n] - m.mean_x) / m.mean_x;
        const double ey = (y[n] - m.mean_y) / m.mean_y;
        m.e10 += ex;
        m.e01 += ey;
        m.e20 += ex * ex;
        m.e02 += ey * ey;
        m.e11 += ex * ey;
    }
    m.cv_x = std::sqrt(m.e20 / m.stations);
    m.cv_y = std::sqrt(m.e02 / m.stations);
    if (m.cv_x > 0.0 && m.cv_y > 0.0) {
        m.correlation = m.e11 / (m.stations * m.cv_x * m.cv_y);
    }
    return m;
}

ClassThroughputs balanced_two_class(int stations, double mean_x, double mean_y, int k, int l)
{
    if (k < 0 || l < 0 || k + l == 0) {
        throw ModelError("two-class populations must be non-negative and not both zero");
    }
    const double scale = stations + k + l - 1.0;
    return {k / (scale * mean_x), l / (scale * mean_y)};
}

ClassThroughputs uja2_first_order(const std::vector<double>& x, const std::vector<double>& y, int k, int l)
{
    const auto m = two_class_moments(x, y);
    auto out = balanced_two_class(m.stations, m.mean_x, m.mean_y, k, l);
    const double now = first_order_bracket(m, k, l);
    require_positive(now, k, l);
    if (k > 0) {
        const double before = first_order_bracket(m, k - 1, l);
        require_positive(before, k - 1, l);
        out.class1 *= before / now;
    }
    if (l > 0) {
        const double before = first_order_bracket(m, k, l - 1);
        require_positive(before, k, l - 1);
        out.class2 *= before / now;
    }
    return out;
}

} // namespace qnkit
