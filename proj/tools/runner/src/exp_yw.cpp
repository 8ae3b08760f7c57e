// yw-check: the smooth approximations of |x| and their densities.
#include <cmath>
#include <memory>

#include "common.hpp"
#include "krbn/yw.hpp"
#include "krbn_tools/svg.hpp"

namespace krbn::tools::detail {

Job parse_yw(ConfigObject& p, const Common&) {
  struct Cfg {
    std::vector<int> n_list;
    std::vector<double> grid;
    double mass_tol;
    int curve_points;
  };
  auto cfg = std::make_shared<Cfg>();
  cfg->n_list = p.integers("n_list", {1, 2, 3, 4, 5, 6, 7, 8});
  cfg->grid = p.numbers("grid", {});
  cfg->mass_tol = p.number("mass_tol", 1e-10);
  cfg->curve_points = static_cast<int>(p.integer("curve_points", 400));
  require(!cfg->n_list.empty(), "'params.n_list' must not be empty");
  // a_n underflows past n = 26; the log form stays exact but the grid checks do not.
  for (int n : cfg->n_list) require(n >= 1 && n <= 26, "'params.n_list' entries must lie in [1, 26]");
  require(cfg->mass_tol > 0.0 && cfg->curve_points >= 2, "need mass_tol > 0 and curve_points >= 2");
  if (cfg->grid.empty()) cfg->grid = yw_default_grid();

  return [cfg](Output& out) {
    const YwReport rep = yw_property_report(cfg->n_list, cfg->grid);
    out.csv("yw_properties.csv", [&](CsvWriter& w) {
      w.header({"n", "prop_i", "prop_ii", "prop_iii", "prop_iv", "max_tail_gap", "max_prime", "support_points"});
      for (const auto& r : rep.rows) {
        w.field(r.n).field(r.prop_i ? 1 : 0).field(r.prop_ii ? 1 : 0).field(r.prop_iii ? 1 : 0);
        w.field(r.prop_iv ? 1 : 0).field(r.max_tail_gap).field(r.max_prime).field(r.support_points).end_row();
      }
    });
    out.csv("yw_violations.csv", [&](CsvWriter& w) {
      w.header({"n", "property", "x", "lhs", "rhs"});
      for (const auto& v : rep.violations) w.field(v.n).field(v.property).field(v.x).field(v.lhs).field(v.rhs).end_row();
    });
    for (const auto& r : rep.rows) {
      const std::string n = std::to_string(r.n);
      out.pass_if("yw_n" + n + "_prop_i", r.prop_i, "support_points", static_cast<double>(r.support_points));
      out.pass_if("yw_n" + n + "_prop_ii", r.prop_ii, "max_prime", r.max_prime);
      out.pass_if("yw_n" + n + "_prop_iii", r.prop_iii, "points", static_cast<double>(cfg->grid.size()));
      out.pass_if("yw_n" + n + "_prop_iv", r.prop_iv, "max_tail_gap", r.max_tail_gap);
    }
    out.csv("yw_mass.csv", [&](CsvWriter& w) {
      w.header({"n", "a_n", "a_n_minus_1", "mass", "mass_error", "tail_offset", "log_identity"});
      for (int n : cfg->n_list) {
        const YwElement e(n);
        const double mass = psi_integral(n);
        // int_{a_n}^{a_{n-1}} dw / (2w) = (log a_{n-1} - log a_n) / 2, exact in integer arithmetic.
        const double ident = (log_a_seq(n - 1) - log_a_seq(n)) / 2.0;
        w.field(n).field(e.a_lo()).field(e.a_hi()).field(mass).field(mass - 1.0).field(e.tail_offset());
        w.field(ident).end_row();
        out.pass_if("yw_n" + std::to_string(n) + "_mass", std::fabs(mass - 1.0) <= cfg->mass_tol, "mass_error",
                    mass - 1.0);
        out.pass_if("yw_n" + std::to_string(n) + "_log_identity", ident == static_cast<double>(n), "value", ident);
      }
    });
    if (out.plots()) {
      std::vector<PlotSeries> ser;
      const double lo = std::log10(a_seq(std::min(cfg->n_list.back(), 3)) / 10.0);
      PlotSeries absx{"|x|", {}, {}, false};
      for (int n : cfg->n_list) {
        PlotSeries s{"phi_" + std::to_string(n), {}, {}, false};
        for (int k = 0; k < cfg->curve_points; ++k) {
          const double x = std::pow(10.0, lo + (0.0 - lo) * k / (cfg->curve_points - 1));
          s.x.push_back(x);
          s.y.push_back(phi_n(n, x));
          if (n == cfg->n_list.front()) {
            absx.x.push_back(x);
            absx.y.push_back(x);
          }
        }
        ser.push_back(std::move(s));
      }
      ser.push_back(std::move(absx));
      write_svg_plot(out.file("phi.svg"), {"phi_n against |x|", "x", "phi_n(x)", true, true}, ser);
    }
  };
}

}  // namespace krbn::tools::detail
