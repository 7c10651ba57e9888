// odt: command line front end for simulation, reconstruction and phase retrieval.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "odt/analysis.hpp"
#include "odt/forward.hpp"
#include "odt/inversion.hpp"
#include "odt/io.hpp"
#include "odt/phase_retrieval.hpp"
#include "odt/plot.hpp"

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

odt::RunConfig config_or_default(const std::string& path) {
  try {
    return path.empty() ? odt::parse_config("") : odt::load_config(path);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

void warn_config(const odt::ExperimentConfig& cfg) {
  for (const auto& w : cfg.warnings()) std::cerr << "warning: " << w << '\n';
}

void check_stack(const odt::MeasurementStack& s, const odt::ExperimentConfig& cfg) {
  if (s.dim != cfg.dim || s.M != cfg.M || s.N != cfg.N)
    throw UsageError("input stack shape (M=" + std::to_string(s.M) + ", N=" + std::to_string(s.N) +
                     ", dim=" + std::to_string(s.dim) + ") does not match the config");
}

void write_report_file(const std::string& path, const odt::ReconstructionReport& rep) {
  if (path.empty()) return;
  std::ofstream os(path, std::ios::app);
  if (!os) throw std::runtime_error("cannot open report '" + path + "'");
  odt::write_report(os, rep);
}

std::string spec_text(const std::string& spec) {
  if (spec.rfind("named:", 0) == 0) return spec;
  return odt::read_text_file(spec);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optical diffraction tomography: simulate, reconstruct, retrieve phase"};
  app.require_subcommand(1);

  std::string config_path, in, out, ref, test, potential, report, plot_path, spec, lambdas;
  std::string model_name = "conv", method_name, variant_name = "hio", inner_name;
  double level = 0.0, tvd = 0.0, lo = 0.0, hi = 0.0;
  std::uint64_t seed = 0;
  int axis = 2, scale = 4;

  auto* phantom = app.add_subcommand("phantom", "Render a phantom to an .odtb potential");
  phantom->add_option("--spec", spec, "JSON file or named:mini-shapes / named:ball-box")
      ->required();
  phantom->add_option("--config", config_path, "Run configuration");
  phantom->add_option("--out", out, "Output potential")->required();

  auto* simulate = app.add_subcommand("simulate", "Simulate the total field on the detector");
  simulate->add_option("--config", config_path, "Run configuration");
  simulate->add_option("--potential", potential, "Scattering potential")->required();
  simulate->add_option("--model", model_name, "conv (Born convolution) or dtot (Fourier route)")
      ->check(CLI::IsMember({"conv", "dtot"}));
  simulate->add_option("--out", out, "Output stack")->required();

  auto* noise = app.add_subcommand("noise", "Add Gaussian noise at a relative level");
  noise->add_option("--in", in, "Input stack")->required();
  noise->add_option("--level", level, "||eps|| / ||data||")->required()->check(CLI::NonNegativeNumber);
  noise->add_option("--seed", seed, "Random seed");
  noise->add_option("--out", out, "Output stack")->required();

  auto* magnitude = app.add_subcommand("magnitude", "Drop the phase of a field stack");
  magnitude->add_option("--in", in, "Input stack")->required();
  magnitude->add_option("--out", out, "Output magnitude stack")->required();

  auto* recon = app.add_subcommand("reconstruct", "Known-phase reconstruction");
  recon->add_option("--config", config_path, "Run configuration");
  recon->add_option("--in", in, "Field stack")->required();
  recon->add_option("--method", method_name, "bp, cg or pdtv")
      ->check(CLI::IsMember({"bp", "cg", "pdtv"}));
  recon->add_option("--tvd", tvd, "TV denoising weight applied after bp or cg")
      ->check(CLI::PositiveNumber);
  recon->add_option("--out", out, "Output potential")->required();
  recon->add_option("--report", report, "JSON-lines iteration report (appended)");

  auto* retrieve = app.add_subcommand("retrieve", "Phase retrieval from magnitudes");
  retrieve->add_option("--config", config_path, "Run configuration");
  retrieve->add_option("--in", in, "Magnitude stack")->required();
  retrieve->add_option("--variant", variant_name, "er, hio or md")
      ->check(CLI::IsMember({"er", "hio", "md"}));
  retrieve->add_option("--inner", inner_name, "cg or pdtv")->check(CLI::IsMember({"cg", "pdtv"}));
  retrieve->add_option("--out", out, "Output potential")->required();
  retrieve->add_option("--report", report, "JSON-lines iteration report (appended)");

  auto* metrics = app.add_subcommand("metrics", "PSNR and SSIM of a reconstruction");
  metrics->add_option("--ref", ref, "Reference potential")->required();
  metrics->add_option("--test", test, "Reconstructed potential")->required();

  auto* stats = app.add_subcommand("stats", "Min, max and mean of |values| of an .odtb file");
  stats->add_option("--in", in, "Input array")->required();

  auto* lcurve = app.add_subcommand("lcurve", "Residual versus TV over a lambda sweep");
  lcurve->add_option("--config", config_path, "Run configuration");
  lcurve->add_option("--in", in, "Field or magnitude stack")->required();
  lcurve->add_option("--lambdas", lambdas, "start:stop:log:count")->required();
  lcurve->add_option("--out", out, "TSV table")->required();
  lcurve->add_option("--plot", plot_path, "PNG plot");

  auto* slice = app.add_subcommand("slice", "Grayscale PNG of a potential (central slice in 3D)");
  slice->add_option("--in", in, "Potential")->required();
  slice->add_option("--out", out, "PNG file")->required();
  slice->add_option("--axis", axis, "Fixed axis of the 3D slice")->check(CLI::Range(0, 2));
  slice->add_option("--lo", lo, "Black level");
  slice->add_option("--hi", hi, "White level (default: maximum)");
  slice->add_option("--scale", scale, "Pixels per sample")->check(CLI::Range(1, 64));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*phantom) {
      const auto cfg = config_or_default(config_path).experiment;
      const auto ps = odt::named_phantom(spec_text(spec), cfg.dim, cfg.L_s);
      odt::write_odtb(out, odt::to_odtb(odt::render_phantom(ps, cfg)));
    } else if (*simulate) {
      const auto cfg = config_or_default(config_path).experiment;
      warn_config(cfg);
      const auto f = odt::potential_from_odtb(odt::read_odtb(potential));
      if (f.dim != cfg.dim || f.K != cfg.K) throw UsageError("potential does not match the config");
      odt::MeasurementStack s;
      if (model_name == "conv") {
        s = odt::born_convolution_forward(f, cfg);
      } else {
        const odt::OdtModel model(cfg);
        s = odt::dtot_apply(f, model);
      }
      odt::write_odtb(out, odt::to_odtb(s));
    } else if (*noise) {
      const auto s = odt::stack_from_odtb(odt::read_odtb(in));
      odt::write_odtb(out, odt::to_odtb(odt::add_noise(s, level, seed)));
    } else if (*magnitude) {
      auto s = odt::stack_from_odtb(odt::read_odtb(in));
      for (auto& v : s.values) v = std::abs(v);
      s.kind = odt::StackKind::magnitude;
      odt::write_odtb(out, odt::to_odtb(s));
    } else if (*recon) {
      auto rc = config_or_default(config_path);
      if (!method_name.empty()) rc.method = odt::method_from_string(method_name);
      if (tvd > 0.0) rc.tvd_lambda = tvd;
      warn_config(rc.experiment);
      const auto s = odt::stack_from_odtb(odt::read_odtb(in));
      if (s.kind == odt::StackKind::magnitude)
        throw UsageError("reconstruct needs a complex field stack; use retrieve for magnitudes");
      check_stack(s, rc.experiment);
      const odt::OdtModel model(rc.experiment);
      const auto rep = odt::reconstruct(s, model, rc.reconstruct_options());
      odt::write_odtb(out, odt::to_odtb(rep.potential));
      write_report_file(report, rep);
    } else if (*retrieve) {
      auto rc = config_or_default(config_path);
      rc.variant = odt::variant_from_string(variant_name);
      if (!inner_name.empty()) rc.inner = odt::method_from_string(inner_name);
      warn_config(rc.experiment);
      const auto d = odt::stack_from_odtb(odt::read_odtb(in));
      if (d.kind != odt::StackKind::magnitude) throw UsageError("retrieve needs a magnitude stack");
      check_stack(d, rc.experiment);
      const odt::OdtModel model(rc.experiment);
      odt::ReconstructionReport rep;
      if (rc.variant == odt::IoVariant::md) {
        rep = odt::md_retrieve(d, model, rc.md_options()).report;
      } else {
        const auto support = odt::SupportConstraint::ball(rc.experiment, rc.support_radius());
        rep = odt::io_retrieve(d, model, support, rc.io_options());
      }
      odt::write_odtb(out, odt::to_odtb(rep.potential));
      write_report_file(report, rep);
    } else if (*metrics) {
      const auto f = odt::potential_from_odtb(odt::read_odtb(ref));
      const auto g = odt::potential_from_odtb(odt::read_odtb(test));
      const double p = odt::psnr(f, g);
      double s = std::numeric_limits<double>::quiet_NaN();
      if (f.K >= 11) s = odt::ssim(f, g);
      std::printf("psnr=%.6f ssim=%.6f\n", p, s);
    } else if (*stats) {
      const auto a = odt::read_odtb(in);
      double mn = std::numeric_limits<double>::infinity(), mx = 0.0, sum = 0.0;
      const std::size_t n = a.count();
      for (std::size_t i = 0; i < n; ++i) {
        const double v = a.dtype == odt::Dtype::real64 ? std::abs(a.real[i]) : std::abs(a.complex[i]);
        mn = std::min(mn, v);
        mx = std::max(mx, v);
        sum += v;
      }
      std::printf("count=%zu min_abs=%.17g max_abs=%.17g mean_abs=%.17g\n", n, mn, mx,
                  n ? sum / static_cast<double>(n) : 0.0);
    } else if (*lcurve) {
      const auto rc = config_or_default(config_path);
      std::vector<double> lams;
      try {
        lams = odt::parse_lambdas(lambdas);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      warn_config(rc.experiment);
      const auto s = odt::stack_from_odtb(odt::read_odtb(in));
      check_stack(s, rc.experiment);
      const odt::OdtModel model(rc.experiment);
      odt::LcurveOptions lo_opts;
      lo_opts.pd.iterations = rc.J_PD;
      lo_opts.weights = rc.weights;
      lo_opts.io = rc.io_options();
      lo_opts.r_s = rc.support_radius();
      const auto pts = odt::lcurve_sweep(s, model, lams, lo_opts);
      std::ofstream os(out);
      if (!os) throw std::runtime_error("cannot open '" + out + "'");
      odt::write_lcurve_tsv(os, pts);
      if (!plot_path.empty()) odt::write_png(plot_path, odt::plot_lcurve(pts));
    } else if (*slice) {
      const auto f = odt::potential_from_odtb(odt::read_odtb(in));
      double top = hi;
      if (!(top > lo)) {
        top = lo;
        for (double v : f.values) top = std::max(top, v);
        if (!(top > lo)) top = lo + 1.0;
      }
      odt::write_png(out, odt::slice_image(f, lo, top, axis, scale));
    }
  } catch (const UsageError& e) {
    std::cerr << "odt: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "odt: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
