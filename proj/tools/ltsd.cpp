// Command-line driver for Lie-Trotter-Suzuki decompositions of ordered
// operator exponentials: schedule generation, planning, evaluation against the
// reference oracle, convergence-order studies and bound-validation sweeps.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lts/evaluator.hpp"
#include "lts/harness.hpp"
#include "lts/json_io.hpp"
#include "lts/oracle.hpp"

namespace {

struct GlobalOptions {
  std::string out;
  std::string format;  // "", "csv" or "json"
  std::uint64_t seed = 1;
  double oracle_tol = 1e-13;
};

void emit(const GlobalOptions& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(g.out);
  if (!os) throw std::runtime_error("cannot open output file: " + g.out);
  os << text;
}

std::string pick_format(const GlobalOptions& g, const std::string& fallback) {
  return g.format.empty() ? fallback : g.format;
}

lts::TermSet resolve_system(const std::string& key, const GlobalOptions& g, int dim,
                            int m) {
  if (!key.empty() && key.front() == '@') {
    std::ifstream is(key.substr(1));
    if (!is) throw std::runtime_error("cannot open system file: " + key.substr(1));
    lts::json j;
    is >> j;
    return lts::system_from_json(j);
  }
  return lts::make_system(key, g.seed, dim, m);
}

bool looks_antihermitian(const lts::TermSet& ts, double mu, double dt) {
  for (int j = 0; j < ts.m(); ++j)
    for (int i = 0; i <= 8; ++i) {
      const double u = mu + dt * i / 8.0;
      const lts::CMatrix h = ts.term(j).eval(u, 0);
      if ((h + h.adjoint()).norm() > 1e-10 * std::max(1.0, h.norm())) return false;
    }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lie-Trotter-Suzuki decompositions of ordered operator exponentials"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--out", g.out, "write output to this path instead of stdout");
  app.add_option("--format", g.format, "output format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--seed", g.seed, "seed for random built-in systems");
  app.add_option("--oracle-tol", g.oracle_tol, "reference-oracle tolerance");

  // schedule
  auto* sub_schedule = app.add_subcommand("schedule", "emit a product-formula schedule");
  int sch_m = 1, sch_k = 1;
  sub_schedule->add_option("--m", sch_m, "number of terms")->required();
  sub_schedule->add_option("--k", sch_k, "formula order index")->required();

  // qk
  auto* sub_qk = app.add_subcommand("qk", "table of Q_k against its closed-form bracket");
  int qk_max = 10;
  sub_qk->add_option("--max-k", qk_max, "largest k")->required();

  // plan
  auto* sub_plan = app.add_subcommand("plan", "order, segment count and exponential budget");
  int plan_m = 1, plan_p = lts::kUnboundedDerivatives;
  double plan_lambda = 1.0, plan_dt = 1.0, plan_eps = 0.1;
  sub_plan->add_option("--m", plan_m)->required();
  sub_plan->add_option("--lambda", plan_lambda, "smoothness constant")->required();
  sub_plan->add_option("--dt", plan_dt)->required();
  sub_plan->add_option("--epsilon", plan_eps)->required();
  sub_plan->add_option("--p", plan_p, "largest trustworthy derivative order");

  // decompose
  auto* sub_dec = app.add_subcommand("decompose", "apply a schedule to a system");
  std::string dec_system;
  int dec_k = 1, dec_dim = 4, dec_m = 2;
  long long dec_r = 1;
  double dec_mu = 0.0, dec_dt = 0.1, dec_kappa_scale = 1.0;
  std::string dec_kappa;
  bool dec_no_oracle = false;
  sub_dec->add_option("--system", dec_system, "registry key or @file.json")->required();
  sub_dec->add_option("--k", dec_k)->required();
  sub_dec->add_option("--r", dec_r, "segment count");
  sub_dec->add_option("--mu", dec_mu);
  sub_dec->add_option("--dt", dec_dt)->required();
  sub_dec->add_option("--dim", dec_dim, "dimension of random systems");
  sub_dec->add_option("--m", dec_m, "terms of random systems");
  sub_dec->add_option("--kappa", dec_kappa, "normalization profile (catalog id)");
  sub_dec->add_option("--kappa-scale", dec_kappa_scale);
  sub_dec->add_flag("--no-oracle", dec_no_oracle, "skip the oracle error norm");

  // order-study
  auto* sub_ord = app.add_subcommand("order-study", "convergence order against the oracle");
  std::string ord_system;
  int ord_k = 2, ord_points = 12, ord_dim = 4, ord_m = 2;
  double ord_mu = 0.0;
  double ord_dt_min = std::pow(10.0, -2.5), ord_dt_max = std::pow(10.0, -0.5);
  sub_ord->add_option("--system", ord_system)->required();
  sub_ord->add_option("--k", ord_k)->required();
  sub_ord->add_option("--mu", ord_mu);
  sub_ord->add_option("--dt-min", ord_dt_min);
  sub_ord->add_option("--dt-max", ord_dt_max);
  sub_ord->add_option("--points", ord_points);
  sub_ord->add_option("--dim", ord_dim);
  sub_ord->add_option("--m", ord_m);

  // bound-sweep
  auto* sub_bnd = app.add_subcommand("bound-sweep", "measured error against the a-priori bound");
  std::string bnd_system = "random-antihermitian";
  int bnd_k = 1, bnd_points = 9, bnd_dim = 4, bnd_m = 2, bnd_seeds = 10;
  double bnd_mu = 0.0, bnd_decades = 2.0, bnd_kappa_scale = 1.0;
  std::string bnd_kappa;
  bool bnd_allow_noncontractive = false;
  sub_bnd->add_option("--system", bnd_system);
  sub_bnd->add_option("--k", bnd_k)->required();
  sub_bnd->add_option("--seeds", bnd_seeds, "number of seeded systems");
  sub_bnd->add_option("--mu", bnd_mu);
  sub_bnd->add_option("--points", bnd_points, "dt grid points per seed");
  sub_bnd->add_option("--decades", bnd_decades, "dt span below the validity threshold");
  sub_bnd->add_option("--dim", bnd_dim);
  sub_bnd->add_option("--m", bnd_m);
  sub_bnd->add_flag("--allow-noncontractive", bnd_allow_noncontractive,
                    "route non-contractive systems through the kappa shift");
  sub_bnd->add_option("--kappa", bnd_kappa, "normalization profile for the shift");
  sub_bnd->add_option("--kappa-scale", bnd_kappa_scale);

  // appendix-b
  auto* sub_apb = app.add_subcommand("appendix-b", "sign-flip normalization demonstration");
  double apb_delta = 0.01, apb_dt = 2.0;
  sub_apb->add_option("--delta", apb_delta)->required();
  sub_apb->add_option("--dt", apb_dt)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sub_schedule) {
      const lts::Schedule s = lts::lts_schedule(sch_m, sch_k);
      emit(g, lts::schedule_to_json(s).dump(2) + "\n");
      return 0;
    }

    if (*sub_qk) {
      if (pick_format(g, "csv") == "csv") {
        std::ostringstream os;
        os << "k,q_max,lower,upper\n";
        for (int k = 1; k <= qk_max; ++k) {
          const auto b = lts::qk_bounds(k);
          os << k << ',' << lts::detail::fmt_double(lts::q_max_for_order(k)) << ','
             << lts::detail::fmt_double(b.lower) << ',' << lts::detail::fmt_double(b.upper)
             << '\n';
        }
        emit(g, os.str());
      } else {
        lts::json rows = lts::json::array();
        for (int k = 1; k <= qk_max; ++k) {
          const auto b = lts::qk_bounds(k);
          rows.push_back({{"k", k},
                          {"q_max", lts::q_max_for_order(k)},
                          {"lower", b.lower},
                          {"upper", b.upper}});
        }
        emit(g, rows.dump(2) + "\n");
      }
      return 0;
    }

    if (*sub_plan) {
      const auto plan = lts::make_plan(plan_m, plan_lambda, plan_dt, plan_eps, plan_p);
      emit(g, lts::plan_to_json(plan).dump(2) + "\n");
      return 0;
    }

    if (*sub_dec) {
      const lts::TermSet ts = resolve_system(dec_system, g, dec_dim, dec_m);
      const lts::Schedule s = lts::lts_schedule(ts.m(), dec_k);
      lts::json out = {{"system", dec_system}, {"k", dec_k}, {"r", dec_r},
                       {"mu", dec_mu},         {"dt", dec_dt}};
      lts::CMatrix reconstructed;
      if (!dec_kappa.empty()) {
        const lts::ScalarProfile& prof = lts::profile_by_id(dec_kappa);
        auto deriv = prof.deriv;
        lts::NormalizationSpec norm;
        norm.kappa = [deriv, dec_kappa_scale](double u) {
          return dec_kappa_scale * deriv(u, 0);
        };
        const auto res = lts::normalized_apply(s, ts, norm, dec_mu, dec_dt, dec_r);
        out["matrix"] = lts::matrix_to_json(res.U);
        out["K"] = res.K;
        out["kappa_integral"] = res.kappa_integral;
        out["spectrum_ok"] = res.spectrum_ok;
        out["max_shifted_real_eig"] = res.max_shifted_real_eig;
        reconstructed = std::exp(res.kappa_integral) * res.U;
      } else {
        reconstructed = lts::segmented_apply(s, ts, dec_mu, dec_dt, dec_r);
        out["matrix"] = lts::matrix_to_json(reconstructed);
      }
      if (!dec_no_oracle) {
        const auto oracle = lts::ordered_exp(ts, dec_mu, dec_dt, g.oracle_tol);
        out["error"] = lts::spectral_norm(reconstructed - oracle.U);
        out["oracle_est_error"] = oracle.est_error;
        out["oracle_steps"] = oracle.steps_taken;
      }
      emit(g, out.dump(2) + "\n");
      return 0;
    }

    if (*sub_ord) {
      const lts::TermSet ts = resolve_system(ord_system, g, ord_dim, ord_m);
      const auto rep = lts::order_study(ord_system, ts, ord_k, ord_mu,
                                        lts::log_grid(ord_dt_min, ord_dt_max, ord_points),
                                        g.oracle_tol);
      if (pick_format(g, "csv") == "csv") {
        std::ostringstream os;
        lts::write_order_study_csv(os, rep);
        emit(g, os.str());
      } else {
        emit(g, lts::order_study_to_json(rep).dump(2) + "\n");
      }
      return 0;
    }

    if (*sub_bnd) {
      lts::BoundSweepReport all;
      all.k = bnd_k;
      for (std::uint64_t seed = g.seed; seed < g.seed + static_cast<std::uint64_t>(bnd_seeds);
           ++seed) {
        GlobalOptions gs = g;
        gs.seed = seed;
        lts::TermSet ts = resolve_system(bnd_system, gs, bnd_dim, bnd_m);
        std::string key = bnd_system;
        if (!looks_antihermitian(ts, bnd_mu, 0.5)) {
          if (!bnd_allow_noncontractive)
            throw std::runtime_error(
                "bound-sweep: system is not anti-Hermitian; pass --allow-noncontractive "
                "with --kappa to validate the shifted generator instead");
          if (bnd_kappa.empty())
            throw std::runtime_error("bound-sweep: --allow-noncontractive needs --kappa");
        }
        // threshold from a pilot Lambda estimate, then two decades below it
        const double lam0 = lts::estimate_lambda(ts, bnd_mu, 0.5, 2 * bnd_k).lambda;
        const double dt_max = 0.5 / (2.0 * std::sqrt(2.0) * lts::pow5(bnd_k - 1) *
                                     lts::q_max_for_order(bnd_k) * lam0);
        const auto grid =
            lts::log_grid(dt_max / std::pow(10.0, bnd_decades), dt_max, bnd_points);
        if (!bnd_kappa.empty()) {
          const lts::TermSet shifted =
              lts::kappa_shifted_terms(ts, lts::profile_by_id(bnd_kappa), bnd_kappa_scale);
          const auto rep = lts::bound_sweep_terms(shifted, bnd_k, bnd_mu, grid, seed,
                                                  g.oracle_tol);
          all.rows.insert(all.rows.end(), rep.rows.begin(), rep.rows.end());
          all.violations += rep.violations;
        } else {
          const auto rep = lts::bound_sweep_terms(ts, bnd_k, bnd_mu, grid, seed, g.oracle_tol);
          all.rows.insert(all.rows.end(), rep.rows.begin(), rep.rows.end());
          all.violations += rep.violations;
        }
      }
      if (pick_format(g, "csv") == "csv") {
        std::ostringstream os;
        lts::write_bound_sweep_csv(os, all);
        emit(g, os.str());
      } else {
        emit(g, lts::bound_sweep_to_json(all).dump(2) + "\n");
      }
      if (all.violations > 0) {
        std::cerr << "bound-sweep: " << all.violations << " bound violation(s)\n";
        return 1;
      }
      return 0;
    }

    if (*sub_apb) {
      const auto rep = lts::appendix_b_demo(apb_delta, apb_dt);
      emit(g, lts::appendix_b_to_json(rep).dump(2) + "\n");
      if (!rep.pass) {
        std::cerr << "appendix-b: closed-form mismatch " << rep.max_entry_diff << "\n";
        return 1;
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "ltsd: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
