#include "masslab/onb_cache.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace masslab {

namespace {

std::string format17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::filesystem::path onb_cache_path(const std::filesystem::path& directory, const MetricSequenceSpec& spec, int p) {
  char name[80];
  std::snprintf(name, sizeof name, "onb_k%d_%016" PRIx64 ".txt", spec.degree(p), fnv1a64(spec.canonical()));
  return directory / "cache" / name;
}

std::string serialize_onb(const OrthonormalBasis& basis) {
  std::string out = "ONBCACHE v1 k=" + std::to_string(basis.degree) + " eps=" + format17(basis.epsilon) +
                    " residual=" + format17(basis.gram_residual) + "\n";
  const auto& c = basis.coefficients;
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
      out += std::to_string(i) + " " + std::to_string(j) + " " + format17(c(i, j).real()) + " " +
             format17(c(i, j).imag()) + "\n";
    }
  }
  return out;
}

std::optional<OrthonormalBasis> parse_onb(const std::string& text, int p, int degree, double epsilon) {
  std::istringstream in(text);
  std::string header;
  if (!std::getline(in, header)) return std::nullopt;
  int k = 0;
  double eps = 0.0, residual = 0.0;
  if (std::sscanf(header.c_str(), "ONBCACHE v1 k=%d eps=%lf residual=%lf", &k, &eps, &residual) != 3) {
    return std::nullopt;
  }
  if (k != degree || eps != epsilon) return std::nullopt;
  OrthonormalBasis basis;
  basis.p = p;
  basis.degree = k;
  basis.epsilon = eps;
  basis.gram_residual = residual;
  const Eigen::Index d = k + 1;
  basis.coefficients = Eigen::MatrixXcd::Zero(d, d);
  std::vector<char> seen(static_cast<std::size_t>(d * d), 0);
  std::string line;
  Eigen::Index count = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    long long row = 0, col = 0;
    double re = 0.0, im = 0.0;
    if (std::sscanf(line.c_str(), "%lld %lld %lf %lf", &row, &col, &re, &im) != 4) return std::nullopt;
    if (row < 0 || col < 0 || row >= d || col >= d) return std::nullopt;
    auto& flag = seen[static_cast<std::size_t>(row * d + col)];
    if (flag) return std::nullopt;
    flag = 1;
    basis.coefficients(row, col) = Complex(re, im);
    ++count;
  }
  if (count != d * d) return std::nullopt;
  basis.identity = basis.coefficients == Eigen::MatrixXcd::Identity(d, d);
  return basis;
}

void save_onb(const std::filesystem::path& path, const OrthonormalBasis& basis) {
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << serialize_onb(basis);
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::optional<OrthonormalBasis> load_onb(const std::filesystem::path& path, int p, int degree, double epsilon) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_onb(buf.str(), p, degree, epsilon);
}

}  // namespace masslab
