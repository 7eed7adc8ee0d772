#include "gcosamp/gcosamp.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace gcosamp;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 1;

struct ModelFlags {
  std::string config;
  std::string type = "ksparse";
  long n = 0, k = 0, block = 1, n1 = 0, n2 = 0, r = 0;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "Config file with a [model] section");
    app->add_option("--model", type, "ksparse | blocksparse | lowrank (ignored with --config)");
    app->add_option("--n", n, "Ambient dimension");
    app->add_option("--k", k, "Sparsity");
    app->add_option("--block", block, "Block length");
    app->add_option("--n1", n1, "Matrix rows");
    app->add_option("--n2", n2, "Matrix columns");
    app->add_option("--r", r, "Rank");
  }

  ModelSpec spec() const {
    if (!config.empty()) return ModelSpec::from_config(Config::load(config));
    ModelSpec s;
    s.type = type;
    s.n = n;
    s.k = k;
    s.block = block;
    s.n1 = n1;
    s.n2 = n2;
    s.r = r;
    return s;
  }
};

std::optional<double> analytic_upper(const ModelSpec& s, int order) {
  if (s.type == "ksparse" && order * s.k <= s.n)
    return width_upper_bound(width::Sparse{double(s.n), double(s.k)}, order);
  if (s.type == "blocksparse") return width_upper_bound(width::Block{double(s.n), double(s.k), double(s.block)}, order);
  if (s.type == "lowrank") return width_upper_bound(width::LowRank{double(s.n1), double(s.n2), double(s.r)}, order);
  return std::nullopt;
}

void print_bound(const BoundReport& r) {
  using detail::format_number;
  std::cout << "m,b_m,w4,w3,eta,m0,mu1,mu2,rho1,xi1,rho2,xi2,rho_m,xi_m,noise_coefficient,contraction,threshold,"
               "converges,probability_floor\n";
  std::cout << r.m << ',' << format_number(r.b_m) << ',' << format_number(r.w4) << ',' << format_number(r.w3) << ','
            << format_number(r.eta) << ',' << format_number(r.m0) << ',' << format_number(r.mu1) << ','
            << format_number(r.mu2) << ',' << format_number(r.rho1) << ',' << format_number(r.xi1) << ','
            << format_number(r.rho2) << ',' << format_number(r.xi2) << ',' << format_number(r.rho_m) << ','
            << format_number(r.xi_m) << ',' << format_number(r.noise_coefficient) << ','
            << format_number(r.contraction) << ',' << format_number(r.threshold) << ','
            << (r.converges ? "true" : "false") << ',' << format_number(r.probability_floor) << '\n';
}

void print_verification(const std::string& kind, const VerificationResult& v) {
  using detail::format_number;
  std::cout << "check,trials,passed,pass_rate,floor,width,b_m,lower,upper\n";
  std::cout << kind << ',' << v.trials << ',' << v.passed << ',' << format_number(v.pass_rate) << ','
            << format_number(v.floor) << ',' << format_number(v.width) << ',' << format_number(v.b_m) << ','
            << format_number(v.lower) << ',' << format_number(v.upper) << '\n';
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Greedy model-based compressive sensing recovery"};
  app.require_subcommand(1);

  // recover
  auto* recover = app.add_subcommand("recover", "Single recovery run from a config file");
  std::string recover_config, trace_path, estimate_path;
  recover->add_option("--config", recover_config, "Config with [problem] [model] [settings]")->required();
  recover->add_option("--trace", trace_path, "Write the iteration trace CSV here (default stdout)");
  recover->add_option("--estimate", estimate_path, "Write the final estimate as a CSV vector");

  // bound
  auto* bound = app.add_subcommand("bound", "Recovery bound report");
  long bound_m = 0;
  double bound_w4 = -1.0, bound_w3 = -1.0, bound_eta = 1.0, bound_m0 = 0.0;
  bound->add_option("--m", bound_m, "Number of measurements")->required();
  bound->add_option("--w4", bound_w4, "Width of U^4 on the sphere");
  bound->add_option("--w3", bound_w3, "Width of U^3 on the sphere (default: w4)");
  bound->add_option("--eta", bound_eta, "Deviation parameter");
  bound->add_option("--m0", bound_m0, "Set m0 directly instead of (w4 + eta)^2");

  // meanwidth
  auto* meanwidth = app.add_subcommand("meanwidth", "Monte-Carlo Gaussian mean width");
  ModelFlags mw_model;
  mw_model.attach(meanwidth);
  int mw_order = 1;
  long mw_samples = 10000;
  std::uint64_t mw_seed = 1;
  meanwidth->add_option("--order", mw_order, "Union order B");
  meanwidth->add_option("--samples", mw_samples, "Gaussian samples");
  meanwidth->add_option("--seed", mw_seed, "Master seed");

  // verify
  auto* verify = app.add_subcommand("verify", "Empirical checks of the width-based deviation bounds");
  verify->require_subcommand(1);
  ModelFlags gordon_model, contraction_model;
  int v_order = 1;
  long v_m = 100, v_trials = 500;
  double v_eta = 3.0, v_mu = -1.0;
  std::uint64_t v_seed = 1;
  auto* gordon = verify->add_subcommand("gordon", "||Au|| stays within b_m +- (w + eta)");
  auto* contraction = verify->add_subcommand("contraction", "Projected contraction of I - mu A*A");
  gordon_model.attach(gordon);
  contraction_model.attach(contraction);
  for (auto* sub : {gordon, contraction}) {
    sub->add_option("--order", v_order, "Union order B");
    sub->add_option("--m", v_m, "Number of measurements");
    sub->add_option("--eta", v_eta, "Deviation parameter");
    sub->add_option("--trials", v_trials, "Trials");
    sub->add_option("--seed", v_seed, "Master seed");
  }
  contraction->add_option("--mu", v_mu, "Step size (default: the largest permitted value)");

  // exp
  auto* exp = app.add_subcommand("exp", "Experiments");
  exp->require_subcommand(1);
  auto* vanishing = exp->add_subcommand("vanishing-noise", "Error versus number of measurements");
  std::string vn_config, vn_out;
  vanishing->add_option("--config", vn_config, "Config with an [experiment] section");
  vanishing->add_option("--out", vn_out, "Output CSV")->required();
  auto* image = exp->add_subcommand("image", "Cartoon/texture reconstruction from partial Fourier data");
  std::string im_config, im_out;
  image->add_option("--config", im_config, "Config with an [experiment] section");
  image->add_option("--out", im_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*recover) {
      const Config cfg = Config::load(recover_config);
      const UnionModel model = ModelSpec::from_config(cfg).build();
      const RecoverySettings settings = settings_from_config(cfg);
      const RecoverProblem p = problem_from_config(cfg, model);
      const RecoveryTrace trace = run_gcosamp(p.a, p.y, model, settings, p.truth);
      if (trace_path.empty()) {
        write_trace_csv(std::cout, trace);
      } else {
        auto out = open_out(trace_path);
        write_trace_csv(out, trace);
      }
      if (!estimate_path.empty()) save_vector_csv(estimate_path, trace.estimate);
    } else if (*bound) {
      if (bound_m0 > 0.0) {
        print_bound(bound_report_from_m0(bound_m, bound_m0, bound_eta));
      } else {
        if (bound_w4 < 0.0) throw ConfigError("bound: give --w4 or --m0");
        print_bound(bound_report(bound_m, bound_w4, bound_w3 < 0.0 ? bound_w4 : bound_w3, bound_eta));
      }
    } else if (*meanwidth) {
      const ModelSpec spec = mw_model.spec();
      WidthEstimate w = mc_mean_width(spec.build(), mw_order, mw_samples, mw_seed);
      w.analytic_upper = analytic_upper(spec, mw_order);
      std::cout << "mean,std_error,samples,analytic_upper,analytic_lower,exactness\n";
      std::cout << detail::format_number(w.mean) << ',' << detail::format_number(w.std_error) << ',' << w.samples
                << ',' << detail::format_optional(w.analytic_upper) << ',' << detail::format_optional(w.analytic_lower)
                << ',' << to_string(w.exactness) << '\n';
    } else if (*verify) {
      if (*gordon) {
        const UnionModel model = gordon_model.spec().build();
        print_verification("gordon", verify_gordon(model, v_order, v_m, v_eta, v_trials, v_seed));
      } else {
        const UnionModel model = contraction_model.spec().build();
        double mu = v_mu;
        if (mu < 0.0) {
          const double w = mc_mean_width(model, v_order, VerifyOptions{}.width_samples, v_seed ^ 0x9e3779b97f4a7c15ULL).mean;
          mu = 1.0 / std::pow(expected_gaussian_norm(v_m) + w + v_eta, 2);
        }
        print_verification("contraction", verify_projected_contraction(model, v_order, v_m, mu, v_eta, v_trials, v_seed));
      }
    } else if (*vanishing) {
      const VanishingNoiseConfig cfg =
          vn_config.empty() ? VanishingNoiseConfig{} : VanishingNoiseConfig::from_config(Config::load(vn_config));
      const VanishingNoiseResult res = run_vanishing_noise(cfg);
      {
        auto out = open_out(vn_out);
        write_vanishing_noise_csv(out, res);
      }
      const std::filesystem::path p(vn_out);
      const auto fit_path = (p.parent_path() / (p.stem().string() + "_fit.csv")).string();
      auto fit = open_out(fit_path);
      write_line_fit_csv(fit, res);
      std::cerr << "slope " << res.fit.slope << " +- " << res.fit.slope_half_width << " over " << res.fit.points
                << " points; failed trials " << res.failed_trials << '\n';
    } else if (*image) {
      const ImageExperimentConfig cfg =
          im_config.empty() ? ImageExperimentConfig{} : ImageExperimentConfig::from_config(Config::load(im_config));
      const ImageExperimentResult res = run_image_experiment(cfg);
      write_image_experiment_outputs(im_out, res, cfg.height, cfg.width);
      write_image_experiment_csv(std::cout, res);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ShapeError& e) {
    std::cerr << "shape error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalAbort& e) {
    std::cerr << "numerical abort: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  }
  return 0;
}
