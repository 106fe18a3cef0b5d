#include "ozimmu/cli.hpp"

#include <fmt/format.h>

#include <CLI11.hpp>
#include <algorithm>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <limits>
#include <map>
#include <string>

#include "ozimmu/datagen.hpp"
#include "ozimmu/dd_gemm.hpp"
#include "ozimmu/matrix_io.hpp"
#include "ozimmu/mmu_plan.hpp"
#include "ozimmu/ozgemm.hpp"
#include "ozimmu/parallel.hpp"
#include "ozimmu/qcsim.hpp"

namespace ozimmu::cli {
namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr const char* kOrderHelp = "Slice-product accumulation order: tail-first or ascending";

struct Common {
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string out = "-";
  std::string manifest;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "RNG seed");
  sub->add_option("--threads", c.threads, "Worker threads (0: OZIMM_THREADS, else all cores)");
  sub->add_option("--out", c.out, "CSV destination, '-' for stdout");
  sub->add_option("--manifest", c.manifest, "Run manifest path (default: <out>.manifest.json)");
}

std::string fmt_err(double v) { return fmt::format("{:.6e}", v); }

std::string size_label(std::size_t m, std::size_t n, std::size_t k) { return fmt::format("{}x{}x{}", m, n, k); }

const MmuSpec& require_mmu(const std::string& name, MmuSpec& storage) {
  auto found = mmu::find(name);
  if (!found) throw Error(ErrorCode::InvalidArgument, "unknown mmu '" + name + "'");
  storage = *found;
  return storage;
}

void require_splits(const std::vector<int>& splits) {
  for (int s : splits) {
    if (s < 1) throw Error(ErrorCode::InvalidArgument, "split counts must be >= 1");
  }
}

// ---------------------------------------------------------------------------
// plan

struct PlanArgs {
  std::vector<std::string> mmu;
  std::string k_min = "2^11";
  std::string k_max = "2^20";
  int target_bits = kDefaultTargetBits;
};

std::string cmd_plan(const PlanArgs& a) {
  std::vector<MmuSpec> units;
  for (const auto& name : a.mmu) {
    MmuSpec m;
    units.push_back(require_mmu(name, m));
  }
  const std::uint64_t lo = parse_count(a.k_min), hi = parse_count(a.k_max);
  if (!std::has_single_bit(lo) || !std::has_single_bit(hi) || lo > hi) {
    throw Error(ErrorCode::InvalidArgument, "--k-min/--k-max must be powers of two with k-min <= k-max");
  }
  if (a.target_bits < 1) throw Error(ErrorCode::InvalidArgument, "--target-bits must be >= 1");
  std::vector<std::uint64_t> ks;
  for (std::uint64_t k = lo; k <= hi; k *= 2) {
    ks.push_back(k);
    if (k == hi) break;
  }
  std::string csv = "mmu,k,alpha,bps,splits,bytes_per_element,gemm_ops,feasible\n";
  for (const auto& r : sweep(units, ks, a.target_bits)) {
    csv += fmt::format("{},{},{},{},{},{:.2f},{},{}\n", r.mmu, r.k, r.alpha, r.bps, r.splits, r.bytes_per_element,
                       r.gemm_ops, r.feasible ? "true" : "false");
  }
  return csv;
}

// ---------------------------------------------------------------------------
// accuracy / invpair

struct AccuracyArgs {
  std::size_t m = 512, n = 512, k = 512;
  std::vector<double> phi{0.1, 1.0, 2.0, 4.0};
  std::vector<int> splits{9, 13};
  std::string mmu = "int8";
  std::string order = "tail-first";
  std::string load_a, load_b;
};

// Rows "<prefix>,fp64,0,..." and "<prefix>,ozaki,<s>,..." against the DD product.
void error_rows(std::string& csv, const std::string& prefix, const Fp64Matrix& a, const Fp64Matrix& b,
                const std::vector<int>& splits, const MmuSpec& mmu, AccumulationOrder order) {
  const DdMatrix ref = dd_gemm(a, b);
  const ErrorStats fp = relative_error_stats(plain_dgemm(a, b), ref);
  csv += fmt::format("{},fp64,0,{},{},ok\n", prefix, fmt_err(fp.mean), fmt_err(fp.max));
  for (int s : splits) {
    OzConfig cfg = OzConfig::fixed(s);
    cfg.mmu = mmu;
    cfg.order = order;
    try {
      const auto [c, rep] = oz_dgemm(a, b, cfg);
      const ErrorStats st = relative_error_stats(c, ref);
      csv += fmt::format("{},ozaki,{},{},{},ok\n", prefix, s, fmt_err(st.mean), fmt_err(st.max));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Infeasible) throw;
      csv += fmt::format("{},ozaki,{},,,infeasible\n", prefix, s);
    }
  }
}

std::string cmd_accuracy(const AccuracyArgs& a, const Common& c) {
  require_splits(a.splits);
  MmuSpec mmu;
  require_mmu(a.mmu, mmu);
  std::string csv = "size,phi,method,splits,mean_rel_err,max_rel_err,status\n";
  if (!a.load_a.empty() || !a.load_b.empty()) {
    if (a.load_a.empty() || a.load_b.empty()) {
      throw Error(ErrorCode::InvalidArgument, "--load-a and --load-b must be given together");
    }
    const Fp64Matrix ma = read_real_matrix(a.load_a), mb = read_real_matrix(a.load_b);
    require_conformable(ma.cols(), mb.rows());
    error_rows(csv, size_label(ma.rows(), mb.cols(), ma.cols()) + ",file", ma, mb, a.splits, mmu, parse_order(a.order));
    return csv;
  }
  for (double phi : a.phi) {
    if (!std::isfinite(phi) || phi < 0.0) throw Error(ErrorCode::InvalidArgument, "--phi values must be finite and >= 0");
    const Fp64Matrix ma = gen_phi_matrix(a.m, a.k, phi, {c.seed, 0});
    const Fp64Matrix mb = gen_phi_matrix(a.k, a.n, phi, {c.seed, 1});
    error_rows(csv, fmt::format("{},{:g}", size_label(a.m, a.n, a.k), phi), ma, mb, a.splits, mmu,
               parse_order(a.order));
  }
  return csv;
}

struct InvpairArgs {
  std::size_t n = 512;
  std::vector<int> splits{7, 9, 11, 13};
  std::string mmu = "int8";
  std::string order = "tail-first";
};

std::string cmd_invpair(const InvpairArgs& a, const Common& c) {
  require_splits(a.splits);
  MmuSpec mmu;
  require_mmu(a.mmu, mmu);
  if (a.n < 1) throw Error(ErrorCode::InvalidArgument, "--n must be >= 1");
  const InversePair pair = gen_inverse_pair(a.n, {c.seed, 0});
  std::string csv = "n,method,splits,mean_rel_err,max_rel_err,status\n";
  error_rows(csv, std::to_string(a.n), pair.a, pair.a_dag, a.splits, mmu, parse_order(a.order));
  return csv;
}

// ---------------------------------------------------------------------------
// qcsim

struct QcsimArgs {
  int qubits = 16;
  int gate_qubits = 4;
  int layers = 8;
  std::vector<std::string> backends{"fp64", "auto:0", "auto:1"};
  std::string order = "tail-first";
  double mem_cap = 8.0 * 1024 * 1024 * 1024;
  std::string dump;
};

std::string cmd_qcsim(const QcsimArgs& a, const Common& c) {
  CircuitSpec spec{a.qubits, a.gate_qubits, a.layers, c.seed};
  spec.validate();
  std::vector<BackendSpec> backends;
  const AccumulationOrder order = parse_order(a.order);
  for (const auto& b : a.backends) {
    backends.push_back(BackendSpec::parse(b));
    backends.back().order = order;
  }

  // Two state copies (run and reference), their gather/product buffers and
  // the int8 slices of all four operand parts at the largest split count.
  const double amps = std::ldexp(1.0, a.qubits);
  const double required = state_bytes(a.qubits) + 16.0 * amps + 4.0 * kDefaultMaxSplits * amps;
  if (required > a.mem_cap) {
    throw Error(ErrorCode::ResourceCap, fmt::format("simulation requires {:.0f} bytes, cap is {:.0f} bytes (--mem-cap)",
                                                    required, a.mem_cap));
  }

  auto dd = gemm_backend(BackendSpec{BackendKind::DoubleDouble});
  const auto [ref_state, ref_rep] = run_brickwork(spec, *dd);
  const std::complex<double> ref0 = ref_state.amplitudes[0];

  std::string csv =
      "backend,qubits,gate_qubits,layers,gates,amp0_re,amp0_im,rel_err,splits_hist,peak_slice_bytes,status\n";
  for (const auto& bs : backends) {
    auto backend = gemm_backend(bs);
    const auto [state, rep] = run_brickwork(spec, *backend);
    std::string hist;
    for (const auto& [s, count] : rep.splits_histogram()) {
      if (s == 0) continue;
      hist += fmt::format("{}{}:{}", hist.empty() ? "" : ";", s, count);
    }
    if (hist.empty()) hist = "-";
    csv += fmt::format("{},{},{},{},{},{:.17e},{:.17e},{},{},{:.0f},ok\n", rep.backend, a.qubits, a.gate_qubits,
                       a.layers, rep.gates.size(), rep.amp0.real(), rep.amp0.imag(),
                       fmt_err(amplitude_error(rep.amp0, ref0)), hist, rep.peak_slice_bytes);
    if (!a.dump.empty()) {
      std::string tag = rep.backend;
      std::replace(tag.begin(), tag.end(), ':', '_');
      write_matrix(a.dump + "." + tag + ".ozmm",
                   CpxMatrix(state.amplitudes.size(), 1, std::vector<std::complex<double>>(state.amplitudes)));
    }
  }
  return csv;
}

// ---------------------------------------------------------------------------
// bench

struct BenchArgs {
  std::vector<std::size_t> sizes{256};
  std::vector<int> splits{9};
  int repeats = 1;
  double phi = 1.0;
  std::string order = "tail-first";
};

std::string cmd_bench(const BenchArgs& a, const Common& c) {
  require_splits(a.splits);
  if (a.repeats < 1) throw Error(ErrorCode::InvalidArgument, "--repeats must be >= 1");
  std::vector<BackendSpec> methods{BackendSpec{}};
  const AccumulationOrder order = parse_order(a.order);
  for (int s : a.splits) methods.push_back({BackendKind::Ozaki, s, 0.0, order});
  for (int s : a.splits) methods.push_back({BackendKind::OzakiFloat, s, 0.0, order});

  // Timings are CPU-emulation figures; every other column is deterministic.
  std::string csv = "size,method,splits,gemm_calls,seconds,effective_gflops,checksum\n";
  for (std::size_t n : a.sizes) {
    const Fp64Matrix ma = gen_phi_matrix(n, n, a.phi, {c.seed, 0});
    const Fp64Matrix mb = gen_phi_matrix(n, n, a.phi, {c.seed, 1});
    for (const auto& spec : methods) {
      auto backend = gemm_backend(spec);
      double best = std::numeric_limits<double>::infinity();
      Fp64Matrix result;
      GemmReport rep;
      for (int r = 0; r < a.repeats; ++r) {
        const auto t0 = Clock::now();
        result = backend->dgemm(ma, mb, &rep);
        best = std::min(best, std::chrono::duration<double>(Clock::now() - t0).count());
      }
      const double flops = 2.0 * double(n) * double(n) * double(n);
      const std::uint64_t calls = spec.kind == BackendKind::Fp64 ? 1 : rep.gemm_calls;
      csv += fmt::format("{},{},{},{},{},{},{}\n", size_label(n, n, n), backend->label(), rep.splits_used, calls,
                         fmt_err(best), fmt_err(best > 0.0 ? flops / best / 1e9 : 0.0),
                         checksum(result.data(), result.size()));
    }
  }
  return csv;
}

// ---------------------------------------------------------------------------
// gemm

struct GemmArgs {
  std::string a, b;
  std::string backend = "auto:0";
  std::string order = "tail-first";
  std::string result;
};

std::string cmd_gemm(const GemmArgs& g) {
  BackendSpec spec = BackendSpec::parse(g.backend);
  spec.order = parse_order(g.order);
  auto backend = gemm_backend(spec);
  AnyMatrix ma = read_matrix(g.a), mb = read_matrix(g.b);
  const bool complex = std::holds_alternative<CpxMatrix>(ma) || std::holds_alternative<CpxMatrix>(mb);
  GemmReport rep;
  std::string sum;
  if (complex) {
    auto as_cpx = [](AnyMatrix& m) {
      if (auto* c = std::get_if<CpxMatrix>(&m)) return *c;
      const auto& r = std::get<Fp64Matrix>(m);
      return make_complex(r, Fp64Matrix(r.rows(), r.cols()));
    };
    const CpxMatrix c = backend->zgemm(as_cpx(ma), as_cpx(mb), &rep);
    sum = checksum(reinterpret_cast<const double*>(c.data()), 2 * c.size());
    if (!g.result.empty()) write_matrix(g.result, c);
  } else {
    const Fp64Matrix c = backend->dgemm(std::get<Fp64Matrix>(ma), std::get<Fp64Matrix>(mb), &rep);
    sum = checksum(c.data(), c.size());
    if (!g.result.empty()) write_matrix(g.result, c);
  }
  return "m,n,k,backend,complex,splits,gemm_calls,real_products,slice_bytes,checksum\n" +
         fmt::format("{},{},{},{},{},{},{},{},{:.0f},{}\n", rep.m, rep.n, rep.k, backend->label(),
                     complex ? "true" : "false", rep.splits_used, rep.gemm_calls, rep.real_products,
                     rep.slice_bytes, sum);
}

// ---------------------------------------------------------------------------
// plumbing

// Arguments that only choose where output goes or how many threads run.
bool is_placement_flag(std::string_view tok, bool& takes_value) {
  for (std::string_view name : {"--threads", "--out", "--manifest"}) {
    if (tok == name) {
      takes_value = true;
      return true;
    }
    if (tok.size() > name.size() && tok.substr(0, name.size()) == name && tok[name.size()] == '=') {
      takes_value = false;
      return true;
    }
  }
  return false;
}

std::vector<std::string> replayable_args(const std::vector<std::string>& args) {
  std::vector<std::string> kept;
  for (std::size_t i = 1; i < args.size(); ++i) {
    bool takes_value = false;
    if (is_placement_flag(args[i], takes_value)) {
      if (takes_value) ++i;
      continue;
    }
    kept.push_back(args[i]);
  }
  return kept;
}

json parameters(const CLI::App* sub) {
  json p = json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string name = opt->get_lnames().front();
    if (name == "help" || name == "out" || name == "manifest" || name == "threads") continue;
    if (opt->count() > 0) {
      const auto& r = opt->results();
      p[name] = r.size() == 1 ? json(r.front()) : json(r);
    } else {
      p[name] = opt->get_default_str();
    }
  }
  return p;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::NonFinite: return kUsage;
    case ErrorCode::Infeasible: return kInfeasible;
    case ErrorCode::ResourceCap: return kResourceCap;
    case ErrorCode::Singular:
    case ErrorCode::Io: return kFailure;
  }
  return kFailure;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw Error(ErrorCode::Io, "write to '" + path + "' failed");
}

}  // namespace

std::uint64_t parse_count(std::string_view text) {
  auto number = [&](std::string_view digits) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || digits.empty()) {
      throw Error(ErrorCode::InvalidArgument, "bad count '" + std::string(text) + "'");
    }
    return v;
  };
  if (text.starts_with("2^")) {
    const std::uint64_t e = number(text.substr(2));
    if (e > 63) throw Error(ErrorCode::InvalidArgument, "count '" + std::string(text) + "' too large");
    return std::uint64_t{1} << e;
  }
  return number(text);
}

std::string checksum(const double* values, std::size_t count) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(values[i]);
    for (int b = 0; b < 8; ++b) {
      h ^= bits & 0xff;
      h *= 0x100000001b3ULL;
      bits >>= 8;
    }
  }
  return fmt::format("{:016x}", h);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ozaki-scheme GEMM emulation on an int8 matrix unit"};
  app.name("ozimmu");
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(OZIMM_VERSION));

  Common common;
  PlanArgs plan;
  auto* p = app.add_subcommand("plan", "Slice count and memory sweep over matrix units and k");
  p->add_option("--mmu", plan.mmu, "Matrix units, comma separated (int4, int8, int12, fp16)")
      ->required()
      ->delimiter(',');
  p->add_option("--k-min", plan.k_min, "Smallest k (power of two, '2^N' accepted)");
  p->add_option("--k-max", plan.k_max, "Largest k");
  p->add_option("--target-bits", plan.target_bits, "Mantissa-space length to cover");

  AccuracyArgs acc;
  auto* a = app.add_subcommand("accuracy", "Relative error vs double-double over phi and split counts");
  a->add_option("--m", acc.m);
  a->add_option("--n", acc.n);
  a->add_option("--k", acc.k);
  a->add_option("--phi", acc.phi, "Exponent-spread parameters")->delimiter(',');
  a->add_option("--splits", acc.splits, "Split counts")->delimiter(',');
  a->add_option("--mmu", acc.mmu);
  a->add_option("--order", acc.order, kOrderHelp);
  a->add_option("--load-a", acc.load_a, "Left operand (OZMM file) instead of generated data");
  a->add_option("--load-b", acc.load_b, "Right operand (OZMM file)");

  InvpairArgs inv;
  auto* ip = app.add_subcommand("invpair", "Error of A * inv(A) vs double-double");
  ip->add_option("--n", inv.n);
  ip->add_option("--splits", inv.splits)->delimiter(',');
  ip->add_option("--mmu", inv.mmu);
  ip->add_option("--order", inv.order, kOrderHelp);

  QcsimArgs qc;
  auto* q = app.add_subcommand("qcsim", "Brickwork random-circuit simulation per GEMM backend");
  q->add_option("--qubits", qc.qubits);
  q->add_option("--gate-qubits", qc.gate_qubits);
  q->add_option("--layers", qc.layers);
  q->add_option("--backend", qc.backends, "fp64, dd, ozaki:<s>, auto:<T>, ozfp:<s>")->delimiter(',');
  q->add_option("--order", qc.order, kOrderHelp);
  q->add_option("--mem-cap", qc.mem_cap, "Refuse runs needing more bytes than this");
  q->add_option("--dump", qc.dump, "Write final states to <prefix>.<backend>.ozmm");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Wall-clock of the fp64 and Ozaki paths (CPU emulation)");
  b->add_option("--sizes", bench.sizes)->delimiter(',');
  b->add_option("--splits", bench.splits)->delimiter(',');
  b->add_option("--repeats", bench.repeats);
  b->add_option("--phi", bench.phi);
  b->add_option("--order", bench.order, kOrderHelp);

  GemmArgs gm;
  auto* g = app.add_subcommand("gemm", "Multiply two OZMM matrix files");
  g->add_option("--a", gm.a)->required();
  g->add_option("--b", gm.b)->required();
  g->add_option("--backend", gm.backend);
  g->add_option("--order", gm.order, kOrderHelp);
  g->add_option("--result", gm.result, "Write the product as an OZMM file");

  std::string replay_manifest;
  auto* r = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  r->add_option("--manifest", replay_manifest)->required();
  r->add_option("--out", common.out);
  r->add_option("--threads", common.threads);

  for (auto* sub : {p, a, ip, q, b, g}) {
    add_common(sub, common);
    for (CLI::Option* opt : sub->get_options()) opt->capture_default_str();
  }

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (r->parsed()) {
      std::ifstream f(replay_manifest);
      if (!f) throw Error(ErrorCode::Io, "cannot open manifest '" + replay_manifest + "'");
      json m;
      try {
        m = json::parse(f);
      } catch (const json::exception& e) {
        throw Error(ErrorCode::Io, "bad manifest: " + std::string(e.what()));
      }
      std::vector<std::string> again{m.at("command").get<std::string>()};
      for (const auto& arg : m.at("args")) again.push_back(arg.get<std::string>());
      again.insert(again.end(), {"--out", common.out});
      if (common.threads > 0) again.insert(again.end(), {"--threads", std::to_string(common.threads)});
      return run(again, out, err);
    }

    set_num_threads(common.threads);
    const auto t0 = Clock::now();
    std::string csv;
    CLI::App* sub = app.get_subcommands().front();
    if (sub == p) csv = cmd_plan(plan);
    else if (sub == a) csv = cmd_accuracy(acc, common);
    else if (sub == ip) csv = cmd_invpair(inv, common);
    else if (sub == q) csv = cmd_qcsim(qc, common);
    else if (sub == b) csv = cmd_bench(bench, common);
    else csv = cmd_gemm(gm);
    const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();

    if (common.out == "-") out << csv;
    else write_text(common.out, csv);

    std::string manifest_path = common.manifest;
    if (manifest_path.empty() && common.out != "-") manifest_path = common.out + ".manifest.json";
    if (!manifest_path.empty()) {
      json m;
      m["command"] = sub->get_name();
      m["args"] = replayable_args(args);
      m["parameters"] = parameters(sub);
      m["seed"] = common.seed;
      m["threads"] = num_threads();
      m["isa"] = isa_name(active_isa());
      m["version"] = OZIMM_VERSION;
      m["csv"] = common.out;
      m["timings"] = {{"total_seconds", seconds}};
      write_text(manifest_path, m.dump(2) + "\n");
    }
    set_num_threads(0);
    return kOk;
  } catch (const Error& e) {
    set_num_threads(0);
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  }
}

}  // namespace ozimmu::cli
