#include "odt/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "json.hpp"

namespace odt {

namespace {

constexpr char kMagic[4] = {'O', 'D', 'T', 'B'};
constexpr std::uint8_t kVersion = 1;

void put_u64(std::ostream& os, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  os.write(b, 8);
}

void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(const unsigned char* b) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

void read_exact(std::istream& is, void* dst, std::size_t n, const char* what) {
  is.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(is.gcount()) != n) {
    if (is.bad()) throw FormatError(FormatErrc::io_failure, "odtb: read failure");
    throw FormatError(FormatErrc::truncated, std::string("odtb: truncated ") + what);
  }
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& what) {
  throw std::invalid_argument("invalid " + key + ": " + what);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, out);
  if (r.ec != std::errc() || r.ptr != end || !std::isfinite(out))
    bad_value(key, "expected a number, got '" + v + "'");
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, out);
  if (r.ec != std::errc() || r.ptr != end) bad_value(key, "expected an integer, got '" + v + "'");
  return out;
}

int to_count(const std::string& key, const std::string& v) {
  const long long n = to_int(key, v);
  if (n < 0 || n > 1'000'000'000) bad_value(key, "out of range");
  return static_cast<int>(n);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, "expected true or false, got '" + v + "'");
}

template <class F>
auto keyed(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    bad_value(key, e.what());
  }
}

}  // namespace

std::size_t OdtbArray::count() const {
  std::size_t n = 1;
  for (auto d : dims) n *= static_cast<std::size_t>(d);
  return n;
}

void write_odtb(std::ostream& os, const OdtbArray& a) {
  if (a.dims.size() > 255) throw std::invalid_argument("odtb: too many dimensions");
  const std::size_t n = a.count();
  if ((a.dtype == Dtype::real64 ? a.real.size() : a.complex.size()) != n)
    throw std::invalid_argument("odtb: payload size does not match dims");
  os.write(kMagic, 4);
  const char head[4] = {static_cast<char>(kVersion), static_cast<char>(a.dtype),
                        static_cast<char>(a.dims.size()), 0};
  os.write(head, 4);
  for (auto d : a.dims) put_u64(os, d);
  if (a.dtype == Dtype::real64) {
    for (double v : a.real) put_f64(os, v);
  } else {
    for (const auto& v : a.complex) {
      put_f64(os, v.real());
      put_f64(os, v.imag());
    }
  }
  if (!os) throw FormatError(FormatErrc::io_failure, "odtb: write failure");
}

OdtbArray read_odtb(std::istream& is) {
  unsigned char head[8];
  read_exact(is, head, 8, "header");
  if (std::memcmp(head, kMagic, 4) != 0) throw FormatError(FormatErrc::bad_magic, "odtb: bad magic");
  if (head[4] != kVersion)
    throw FormatError(FormatErrc::bad_version,
                      "odtb: unsupported version " + std::to_string(head[4]));
  if (head[5] > 1)
    throw FormatError(FormatErrc::bad_dtype, "odtb: unknown dtype " + std::to_string(head[5]));
  OdtbArray a;
  a.dtype = static_cast<Dtype>(head[5]);
  a.dims.resize(head[6]);
  for (auto& d : a.dims) {
    unsigned char b[8];
    read_exact(is, b, 8, "dims");
    d = get_u64(b);
  }
  std::size_t n = 1;
  for (auto d : a.dims) {
    if (d != 0 && n > (std::uint64_t{1} << 40) / d)
      throw FormatError(FormatErrc::truncated, "odtb: dims exceed any plausible payload");
    n *= static_cast<std::size_t>(d);
  }
  const std::size_t width = a.dtype == Dtype::real64 ? 1 : 2;
  const auto here = is.tellg();
  if (here != std::streampos(-1)) {
    is.seekg(0, std::ios::end);
    const auto end = is.tellg();
    is.seekg(here);
    if (end != std::streampos(-1) && static_cast<std::size_t>(end - here) < 8 * width * n)
      throw FormatError(FormatErrc::truncated, "odtb: truncated payload");
  }
  std::vector<unsigned char> buf(8 * width * n);
  read_exact(is, buf.data(), buf.size(), "payload");
  if (a.dtype == Dtype::real64) {
    a.real.resize(n);
    for (std::size_t i = 0; i < n; ++i) a.real[i] = std::bit_cast<double>(get_u64(&buf[8 * i]));
  } else {
    a.complex.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      a.complex[i] = {std::bit_cast<double>(get_u64(&buf[16 * i])),
                      std::bit_cast<double>(get_u64(&buf[16 * i + 8]))};
  }
  return a;
}

void write_odtb(const std::string& path, const OdtbArray& a) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw FormatError(FormatErrc::io_failure, "odtb: cannot open '" + path + "' for writing");
  write_odtb(os, a);
}

OdtbArray read_odtb(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError(FormatErrc::io_failure, "odtb: cannot open '" + path + "'");
  return read_odtb(is);
}

OdtbArray to_odtb(const ScatteringPotential& f) {
  OdtbArray a;
  a.dtype = Dtype::real64;
  a.dims.assign(static_cast<std::size_t>(f.dim), static_cast<std::uint64_t>(f.K));
  a.real = f.values;
  return a;
}

ScatteringPotential potential_from_odtb(const OdtbArray& a) {
  if (a.dtype != Dtype::real64) throw std::invalid_argument("potential file must hold real data");
  if (a.dims.size() != 2 && a.dims.size() != 3)
    throw std::invalid_argument("potential file must be 2- or 3-dimensional");
  for (auto d : a.dims)
    if (d != a.dims[0]) throw std::invalid_argument("potential file must be a cube (K, K[, K])");
  return {static_cast<int>(a.dims.size()), static_cast<int>(a.dims[0]), a.real};
}

OdtbArray to_odtb(const MeasurementStack& s) {
  OdtbArray a;
  a.dims.push_back(static_cast<std::uint64_t>(s.M));
  for (int i = 0; i < s.dim - 1; ++i) a.dims.push_back(static_cast<std::uint64_t>(s.N));
  if (s.kind == StackKind::magnitude) {
    a.dtype = Dtype::real64;
    a.real.resize(s.values.size());
    for (std::size_t i = 0; i < s.values.size(); ++i) a.real[i] = s.values[i].real();
  } else {
    a.dtype = Dtype::complex128;
    a.complex = s.values;
  }
  return a;
}

MeasurementStack stack_from_odtb(const OdtbArray& a) {
  if (a.dims.size() != 2 && a.dims.size() != 3)
    throw std::invalid_argument("stack file must have dims (M, N[, N])");
  if (a.dims.size() == 3 && a.dims[1] != a.dims[2])
    throw std::invalid_argument("stack file must have dims (M, N, N)");
  const int dim = static_cast<int>(a.dims.size());
  const auto kind = a.dtype == Dtype::real64 ? StackKind::magnitude : StackKind::total_field;
  MeasurementStack s(dim, static_cast<int>(a.dims[0]), static_cast<int>(a.dims[1]), kind);
  if (a.dtype == Dtype::real64) {
    for (std::size_t i = 0; i < a.real.size(); ++i) s.values[i] = a.real[i];
  } else {
    s.values = a.complex;
  }
  return s;
}

// ---------------------------------------------------------------------------

double RunConfig::support_radius() const {
  return r_s ? *r_s : default_support_radius(experiment);
}

ReconstructOptions RunConfig::reconstruct_options() const {
  ReconstructOptions o;
  o.method = method;
  o.weights = weights;
  o.cg_iterations = J_CG;
  o.pd.lambda = lambda;
  o.pd.iterations = J_PD;
  o.tvd_lambda = tvd_lambda;
  return o;
}

IoOptions RunConfig::io_options() const {
  IoOptions o;
  o.variant = variant;
  o.inner = inner;
  o.outer_iterations = J_IO;
  o.beta = beta;
  o.cg_iterations = J_CG;
  o.pd.lambda = lambda;
  o.pd.iterations = J_PD;
  o.weights = weights;
  o.warm_start = warm_start;
  return o;
}

MdOptions RunConfig::md_options() const {
  MdOptions o;
  o.variant = IoVariant::hio;
  o.outer_iterations = J_IO;
  o.beta = beta;
  o.r_s = support_radius();
  o.stage2 = reconstruct_options();
  o.stage2.method = inner;
  return o;
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
    if (!kv.emplace(key, value).second) bad_value(key, "given twice");
  }

  auto& e = c.experiment;
  bool have_Ls = false;
  for (const auto& [key, v] : kv) {
    if (key == "dim") e.dim = to_count(key, v);
    else if (key == "k0") e.k0 = to_double(key, v);
    else if (key == "r_M") e.r_M = to_double(key, v);
    else if (key == "L_M") e.L_M = to_double(key, v);
    else if (key == "L_s") { e.L_s = to_double(key, v); have_Ls = true; }
    else if (key == "K") e.K = to_count(key, v);
    else if (key == "N") e.N = to_count(key, v);
    else if (key == "M") e.M = to_count(key, v);
    else if (key == "T") e.T = to_double(key, v);
    else if (key == "rotation_axis") {
      if (v == "x1") e.rotation_axis = 0;
      else if (v == "x2") e.rotation_axis = 1;
      else e.rotation_axis = to_count(key, v);
    }
    else if (key == "method") c.method = keyed(key, [&] { return method_from_string(v); });
    else if (key == "inner") c.inner = keyed(key, [&] { return method_from_string(v); });
    else if (key == "variant") c.variant = keyed(key, [&] { return variant_from_string(v); });
    else if (key == "lambda") c.lambda = to_double(key, v);
    else if (key == "J_CG") c.J_CG = to_count(key, v);
    else if (key == "J_PD") c.J_PD = to_count(key, v);
    else if (key == "J_IO") c.J_IO = to_count(key, v);
    else if (key == "beta") c.beta = to_double(key, v);
    else if (key == "r_s") c.r_s = to_double(key, v);
    else if (key == "noise_level") c.noise_level = to_double(key, v);
    else if (key == "seed") {
      const long long s = to_int(key, v);
      if (s < 0) bad_value(key, "must be nonnegative");
      c.seed = static_cast<std::uint64_t>(s);
    }
    else if (key == "weights") {
      if (v == "quadrature") c.weights = WeightsMode::quadrature;
      else if (v == "uniform") c.weights = WeightsMode::uniform;
      else bad_value(key, "expected quadrature or uniform");
    }
    else if (key == "warm_start") c.warm_start = to_bool(key, v);
    else if (key == "tvd_lambda") c.tvd_lambda = to_double(key, v);
    else if (key == "input") c.input = v;
    else if (key == "output") c.output = v;
    else throw std::invalid_argument("unknown config key '" + key + "'");
  }
  if (!have_Ls) e.L_s = e.K / (4.0 * std::numbers::sqrt2);

  e.validate();
  if (!(c.lambda > 0.0)) bad_value("lambda", "must be positive");
  if (c.J_CG < 1) bad_value("J_CG", "must be at least 1");
  if (c.J_IO < 1) bad_value("J_IO", "must be at least 1");
  if (!(c.beta > 0.0 && c.beta <= 1.0)) bad_value("beta", "must be in (0, 1]");
  if (c.r_s && !(*c.r_s > 0.0 && *c.r_s <= e.L_s * std::sqrt(static_cast<double>(e.dim))))
    bad_value("r_s", "must be in (0, L_s*sqrt(dim)]");
  if (!(c.noise_level >= 0.0)) bad_value("noise_level", "must be nonnegative");
  if (c.tvd_lambda && !(*c.tvd_lambda > 0.0)) bad_value("tvd_lambda", "must be positive");
  if (c.inner == Method::bp) bad_value("inner", "must be cg or pdtv");
  return c;
}

std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

RunConfig load_config(const std::string& path) { return parse_config(read_text_file(path)); }

// ---------------------------------------------------------------------------

void write_report(std::ostream& os, const ReconstructionReport& report) {
  for (const auto& r : report.history) {
    nlohmann::ordered_json j;
    j["iter"] = r.iter;
    j["residual"] = r.residual;
    if (r.tv) j["tv"] = *r.tv;
    if (r.tau) j["tau"] = *r.tau;
    if (r.sigma) j["sigma"] = *r.sigma;
    j["wall_ms"] = r.wall_ms;
    os << j.dump() << '\n';
  }
}

std::vector<double> parse_lambdas(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string p;
  while (std::getline(ss, p, ':')) parts.push_back(trim(p));
  if (parts.size() == 1) {
    const double v = to_double("lambdas", parts[0]);
    if (!(v > 0.0)) bad_value("lambdas", "must be positive");
    return {v};
  }
  if (parts.size() != 4) bad_value("lambdas", "expected start:stop:log:count");
  const double a = to_double("lambdas", parts[0]);
  const double b = to_double("lambdas", parts[1]);
  const long long n = to_int("lambdas", parts[3]);
  if (!(a > 0.0) || !(b > a)) bad_value("lambdas", "need 0 < start < stop");
  if (n < 1 || n > 100000) bad_value("lambdas", "count out of range");
  std::vector<double> out;
  if (n == 1) return {a};
  for (long long i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n - 1);
    if (parts[2] == "log")
      out.push_back(std::pow(10.0, std::log10(a) + t * (std::log10(b) - std::log10(a))));
    else if (parts[2] == "lin")
      out.push_back(a + t * (b - a));
    else
      bad_value("lambdas", "spacing must be log or lin");
  }
  out.front() = a;
  out.back() = b;
  return out;
}

void write_lcurve_tsv(std::ostream& os, const std::vector<LcurvePoint>& points) {
  os << "lambda\tresidual\ttv\n";
  os << std::setprecision(17);
  for (const auto& p : points) os << p.lambda << '\t' << p.residual << '\t' << p.tv << '\n';
}

}  // namespace odt
