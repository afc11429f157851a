#include "dflab/nucleus.hpp"

#include <cmath>
#include <stdexcept>

namespace dflab {

NuclearModel::NuclearModel(double radius, int exponent) : radius_(radius), q_(exponent) {
    if (!(radius_ > 0.0)) throw std::invalid_argument("NuclearModel: radius must be positive");
    if (q_ < 2) throw std::invalid_argument("NuclearModel: exponent must be >= 2 for a smooth edge");

    // total charge = 4 pi C R^3 I_q with I_q = q! / (2 prod_{j=1}^{q+1}(j+1/2))
    double iq = 1.0;
    for (int j = 1; j <= q_; ++j) iq *= j;
    double denom = 2.0;
    for (int j = 1; j <= q_ + 1; ++j) denom *= (j + 0.5);
    iq /= denom;
    c_ = 1.0 / (4.0 * M_PI * radius_ * radius_ * radius_ * iq);

    // Q(r) = 4 pi C r^3 sum_j binom(q,j)(-1)^j (r/R)^{2j}/(2j+3)
    charge_poly_.resize(q_ + 1);
    double binom = 1.0;
    for (int j = 0; j <= q_; ++j) {
        charge_poly_[j] = ((j % 2) ? -binom : binom) / (2.0 * j + 3.0);
        binom *= static_cast<double>(q_ - j) / (j + 1.0);
    }
}

double NuclearModel::density(double r) const {
    if (r >= radius_) return 0.0;
    const double u = r / radius_;
    return c_ * std::pow(1.0 - u * u, q_);
}

double NuclearModel::charge_inside(double r) const {
    if (r >= radius_) return 1.0;
    const double u2 = (r / radius_) * (r / radius_);
    double s = 0.0;
    for (int j = q_; j >= 0; --j) s = s * u2 + charge_poly_[j];
    return 4.0 * M_PI * c_ * r * r * r * s;
}

double NuclearModel::potential(double r) const {
    if (r >= radius_) return -1.0 / r;
    // outer part: 4 pi C R^2 (1-(r/R)^2)^{q+1} / (2(q+1))
    const double u2 = (r / radius_) * (r / radius_);
    const double outer =
        4.0 * M_PI * c_ * radius_ * radius_ * std::pow(1.0 - u2, q_ + 1) / (2.0 * (q_ + 1));
    if (r == 0.0) return -outer;
    return -charge_inside(r) / r - outer;
}

NuclearModel build_nuclear_model(double radius, int exponent) {
    return NuclearModel(radius, exponent);
}

} // namespace dflab
