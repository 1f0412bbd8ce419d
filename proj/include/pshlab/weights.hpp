#pragma once

#include <complex>
#include <string>
#include <vector>

#include "pshlab/domain.hpp"
#include "pshlab/gain.hpp"

namespace pshlab {

// Piecewise-linear convex increasing profile g < 0 on (-inf, 0); the carrier
// of the radial weight psi = g(log|z|).
struct RadialProfile {
    std::vector<double> breakpoints;  // x1 < ... < xm < 0
    std::vector<double> slopes;       // s0 <= s1 <= ... <= sm, s0 > 0
    double anchor = 0.0;              // g(x1)

    void validate() const;            // throws std::invalid_argument
    double eval(double x) const;      // g(x)
    double slope_at(double x) const;
    double inverse(double y) const;   // g^{-1}, y in (-inf, g(0^-)]
    double limit_at_zero() const;     // g(0^-)

    // profile shifted so g(0^-) == 0 (sup psi = 0 normalization)
    RadialProfile normalized() const;
};

enum class WeightConstruction { radial_example, char_construction, power_green, plain_power };
enum class ObjectKind { form, function };

// A (phi, psi) pair with its jet data:
//   radial-example:     psi = g(log|z|),        phi = 2log|z| - g(log|z|)   (disc, z0=0, forms)
//   char-construction:  psi = G + max(G, a),    phi = min(G, a), phi0 = 0   (forms)
//   power-green(k):     psi = 2(k+1) G_Omega,   phi = 0                     (functions)
//   plain-power(k):     psi = 2(k+1) log|z|,    phi = 0                     (disc, z0=0, functions)
class WeightPair {
public:
    static WeightPair radial_example(const DomainModel& disc, RadialProfile profile);
    static WeightPair char_construction(const DomainModel& domain, double a);
    static WeightPair power_green(const DomainModel& domain, int k);
    static WeightPair plain_power(const DomainModel& disc, int k,
                                  std::vector<Complex> jet_targets);

    WeightConstruction construction() const { return construction_; }
    const DomainModel& domain() const { return domain_; }
    ObjectKind object_kind() const { return object_kind_; }
    int jet_order() const { return jet_order_; }                 // nu
    const std::vector<Complex>& jet_target() const { return jet_target_; }
    double char_a() const { return a_; }
    int power_k() const { return k_; }
    const RadialProfile& profile() const { return profile_; }

    double eval_psi(Complex z) const;   // <= 0, -inf at z0
    double eval_phi(Complex z) const;   // may be -inf at z0

    // e^{-phi(z)} c(-psi(z)), times 2 for (1,0)-forms. Throws on nonfinite
    // intermediates away from z0.
    double density(const GainFunction& gain, Complex z) const;

    // true when psi, phi depend on |z| only and z0 = 0 (enables the diagonal
    // Gram fast path)
    bool is_radial() const;

    double psi_radial(double s) const;  // radial constructions only
    double phi_radial(double s) const;
    double density_radial(const GainFunction& gain, double s) const;

    // radius of {psi < -t} for radial constructions; 1 when the whole disc
    // qualifies
    double region_radius(double t) const;

    // mandatory radial subdivision points inside (0, R): construction kinks
    // plus gain breakpoints mapped through -psi
    std::vector<double> radial_kinks(const GainFunction& gain, double t) const;

    std::string describe() const;

private:
    WeightPair() = default;

    WeightConstruction construction_ = WeightConstruction::plain_power;
    DomainModel domain_ = DomainModel::unit_disc(0.0);
    ObjectKind object_kind_ = ObjectKind::function;
    int jet_order_ = 1;
    std::vector<Complex> jet_target_;
    double a_ = -0.5;       // char-construction level
    int k_ = 0;             // power constructions
    RadialProfile profile_;
};

// nu per the construction table
int jet_order_of(const WeightPair& w);

} // namespace pshlab
