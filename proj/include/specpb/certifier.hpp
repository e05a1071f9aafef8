// Certificates that the spectral invariant of the certification profile F
// vanishes.  The certifier enumerates every index-n capped orbit class of F
// (three plateaus, four shell corners), classifies each action against the
// half-open interval (0, E], and certifies c(F) = 0 when no action lands in
// it beyond the zero tolerance.
#pragma once

#include "specpb/exact.hpp"
#include "specpb/floer.hpp"
#include "specpb/json_io.hpp"
#include "specpb/radial.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace specpb {

struct CertificationInput {
  ManifoldModel model;
  Rational r;
  Rational eps;
  PiRational E;                     ///< displacement-energy bound of the ball
  std::optional<PiRational> tau;    ///< zero tolerance; default 1e-6 * pi r^2
  PiRational h_max{0};              ///< bound on sup H
  std::optional<PiRational> m;      ///< override for the inner plateau value
  std::optional<PiRational> plateau;  ///< middle plateau; default -pi r^2
  std::optional<std::int64_t> l_window;  ///< cap on in-band windings per family

  PiRational effective_tau() const;
  PiRational effective_plateau() const;
};

enum class Verdict { Zero, Negative, AboveE, ForbiddenInRange };
enum class CertStatus { Certified, Refuted, InvalidInput };

std::string to_string(Verdict v);
std::string to_string(CertStatus s);

/// ZERO: |a| <= tau; NEGATIVE: a < -tau; ABOVE_E: a > E; otherwise a lies in
/// (tau, E] and is FORBIDDEN_IN_RANGE.
Verdict classify(const PiRational& action, const PiRational& E, const PiRational& tau);

struct OrbitVerdict {
  CappedOrbitClass orbit;
  PiRational action;  ///< orbit.action with lambda substituted
  Verdict verdict = Verdict::Zero;
  int step = 0;       ///< 1..7

  /// Winding of circle rows, 0 for plateau rows.
  std::int64_t winding() const;
};

/// Bookkeeping for one corner family (steps 4-7).  Index-n actions along the
/// family are affine in the winding, action(l) = intercept + slope * l, and
/// the admissible windings form the progression l = l_first + stride * j.
/// Only windings whose action can meet [-tau, E + tau] (the band) plus the
/// nearest admissible winding on each side of the band are enumerated; by
/// monotonicity every other winding is strictly further from the band.
struct FamilyWindow {
  int step = 0;
  Rational s_star;
  int concavity = 0;
  int branch = 0;
  std::int64_t l_min = 0;
  std::int64_t l_max = -1;
  std::int64_t l_first = 0;
  std::int64_t stride = 1;
  std::int64_t admissible = 0;
  PiRational intercept;
  PiRational slope;
  std::vector<std::int64_t> in_band;
  std::vector<std::int64_t> witnesses;
  std::int64_t excluded = 0;
  bool exclusion_verified = false;
};

struct SpectralCertificate {
  CertStatus status = CertStatus::InvalidInput;
  std::optional<OrbitVerdict> offender;
  std::vector<std::string> violations;
  PiRational chosen_m;
  std::vector<OrbitVerdict> table;
  std::vector<FamilyWindow> windows;
  CertificationInput input;
  std::vector<std::string> frame;
};

/// Empty when the input is admissible.  Monotone models need
/// pi r^2 <= E < |lambda| / 2; aspherical ones only 0 < eps < r/4.
std::vector<std::string> check_preconditions(const CertificationInput& in);

/// |n lambda - pi (r - 4 eps)^2|, the spacing of the step-4 actions.
PiRational inner_corner_spacing(const CertificationInput& in);

/// Smallest positive multiple of inner_corner_spacing strictly above
/// max(h_max + pi r^2, E) + tau.
PiRational choose_m(const CertificationInput& in);

/// Thrown when a family has more in-band windings than l_window allows.
class WindowOverflow : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Index-n classes of the certification profile with plateau values m and
/// in.effective_plateau(), sorted by (step, winding, c1).
std::vector<OrbitVerdict> enumerate_index_n(const CertificationInput& in, const PiRational& m,
                                            std::vector<FamilyWindow>* windows = nullptr);

SpectralCertificate certify(const CertificationInput& in);

/// Reruns certification with middle plateau a in [-pi r^2, 0].
SpectralCertificate probe_plateau(CertificationInput in, const PiRational& a);

Json to_json(const OrbitVerdict& v);
Json to_json(const SpectralCertificate& cert);
Json parameters_json(const CertificationInput& in);
std::string certificate_csv(const SpectralCertificate& cert);
std::string certificate_markdown(const SpectralCertificate& cert);

}  // namespace specpb
