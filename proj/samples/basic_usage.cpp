// Half-wave operator on a 2D grid: Plancherel check, one atom image, and the
// admissible exponent range.
#include <iostream>

#include "pfio/pfio.hpp"

int main() {
  using namespace pfio;
  auto parsed = parse_config_string(R"({
    "space": {"dims": [2]},
    "grid": {"samples": 256, "half_width": 1.5},
    "phase": {"kind": "half_wave"},
    "symbol": {"kind": "separable", "m": -0.5, "R": 1.4}
  })");
  if (!parsed.config) {
    for (const auto& v : parsed.violations) std::cerr << v << "\n";
    return 2;
  }
  FioSpec spec = build_spec(*parsed.config);

  Atom a = make_atom(spec.grid, Vec::Zero(2), 0.125);
  SampledField Fa = apply_fio(spec, a.field);
  std::cout << "||a||_2 = " << lp_norm(a.field, 2.0) << ", ||Fa||_2 = " << lp_norm(Fa, 2.0) << "\n";

  AtomImage img = atom_image_bound(spec, a, Orientation::forward);
  std::cout << "int |Fa|: " << img.inside << " on B*, " << img.outside << " off it\n";

  PInterval I = admissible_p_interval(-0.5, 3, 1);
  std::cout << "admissible p for m=-1/2, N=3, n=1: [" << I.p_min << ", " << I.p_max << "]\n";
  return 0;
}
