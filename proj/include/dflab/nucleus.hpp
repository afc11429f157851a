#pragma once

#include <functional>
#include <vector>

namespace dflab {

/// Smeared nuclear charge: n(r) = C (1-(r/R)^2)^q inside r < R, zero outside,
/// normalized to unit total charge. q >= 2 keeps n smooth at the support
/// edge. The potential V = -n * (1/|x|) follows from the shell theorem and is
/// evaluated in closed form (the profile is polynomial, so the in/out
/// cumulative integrals are too).
class NuclearModel {
  public:
    NuclearModel(double radius, int exponent);

    double radius() const { return radius_; }
    int exponent() const { return q_; }
    double normalization() const { return c_; }

    double density(double r) const;
    /// charge inside radius r
    double charge_inside(double r) const;
    /// V(r); finite at r = 0, exactly -1/r for r >= radius()
    double potential(double r) const;

    std::function<double(double)> potential_fn() const {
        return [*this](double r) { return potential(r); };
    }

  private:
    double radius_;
    int q_;
    double c_;                        // profile normalization
    std::vector<double> charge_poly_; // coefficients of (r/R)^{2j} in Q(r)/(4pi C r^3)
};

NuclearModel build_nuclear_model(double radius, int exponent);

} // namespace dflab
