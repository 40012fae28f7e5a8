#include "herit/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>

namespace herit {

namespace fs = std::filesystem;

namespace {

constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kKindDataset = 1;
constexpr std::uint32_t kKindGrm = 2;
constexpr char kDatasetMagic[8] = {'H', 'E', 'R', 'I', 'T', 'D', 'S', '\0'};
constexpr char kGrmMagic[8] = {'H', 'E', 'R', 'I', 'T', 'G', 'R', '\0'};

static_assert(std::endian::native == std::endian::little, "container I/O assumes a little-endian host");

class Writer {
 public:
  template <class T>
  void put(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    const auto* p = reinterpret_cast<const char*>(&v);
    out_.append(p, sizeof(T));
  }
  void raw(const void* data, std::size_t bytes) { out_.append(static_cast<const char*>(data), bytes); }
  void row_major(const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) put<double>(m(i, j));
    }
  }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  template <class T>
  T get() {
    T v;
    need(sizeof(T));
    std::memcpy(&v, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  void raw(void* dst, std::size_t bytes) {
    need(bytes);
    std::memcpy(dst, in_.data() + pos_, bytes);
    pos_ += bytes;
  }
  Matrix row_major(std::size_t rows, std::size_t cols) {
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = get<double>();
    }
    return m;
  }
  void expect_end() const {
    if (pos_ != in_.size()) throw IoError("container has trailing bytes");
  }

 private:
  void need(std::size_t bytes) const {
    if (in_.size() - pos_ < bytes) throw IoError("container is truncated");
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

void check_header(Reader& r, const char (&magic)[8], std::uint32_t kind) {
  std::array<char, 8> got{};
  r.raw(got.data(), got.size());
  if (std::memcmp(got.data(), magic, 8) != 0) throw IoError("bad container magic");
  if (r.get<std::uint32_t>() != kVersion) throw IoError("unsupported container version");
  if (r.get<std::uint32_t>() != kind) throw IoError("unexpected container kind");
}

std::uint32_t kind_code(GenotypeKind k) { return static_cast<std::uint32_t>(k); }

}  // namespace

void write_file_atomic(const fs::path& path, std::string_view contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw IoError("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move output into place at '" + path.string() + "'");
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

std::string encode_dataset(const SimulatedStudy& s) {
  const std::size_t n = s.sample.size();
  const std::size_t loci = s.config.n_loci;
  Writer w;
  w.raw(kDatasetMagic, 8);
  w.put<std::uint32_t>(kVersion);
  w.put<std::uint32_t>(kKindDataset);
  w.put<std::uint64_t>(s.seed);
  w.put<std::uint64_t>(n);
  w.put<std::uint64_t>(loci);
  w.put<std::uint64_t>(s.population_size);
  w.put<std::uint64_t>(s.population_cases);
  w.put<std::uint64_t>(s.config.target_cases);
  w.put<std::uint32_t>(kind_code(s.config.kind));
  w.put<std::uint32_t>(0);
  for (double v : {s.design.K, s.design.P, s.design.t, s.design.p_case, s.design.p_control,
                   s.lp.eta_star, s.lp.sigma_sq}) {
    w.put<double>(v);
  }
  w.put<std::uint64_t>(s.sample.dropped_loci.size());
  for (auto k : s.sample.dropped_loci) w.put<std::uint64_t>(k);
  for (auto idx : s.sample.indices) w.put<std::uint64_t>(idx);
  w.raw(s.sample.y.data(), n);
  for (std::size_t i = 0; i < n; ++i) w.put<double>(s.sample.w[static_cast<Eigen::Index>(i)]);
  w.row_major(s.raw.values);
  w.row_major(s.sample.z_study);
  return w.take();
}

SimulatedStudy decode_dataset(std::string_view bytes) {
  Reader r(bytes);
  check_header(r, kDatasetMagic, kKindDataset);
  SimulatedStudy s;
  s.seed = r.get<std::uint64_t>();
  const auto n = r.get<std::uint64_t>();
  const auto loci = r.get<std::uint64_t>();
  s.population_size = r.get<std::uint64_t>();
  s.population_cases = r.get<std::uint64_t>();
  s.config.target_cases = r.get<std::uint64_t>();
  const auto kind = r.get<std::uint32_t>();
  if (kind > 2) throw IoError("unknown genotype kind in container");
  s.config.kind = static_cast<GenotypeKind>(kind);
  r.get<std::uint32_t>();
  s.design.K = r.get<double>();
  s.design.P = r.get<double>();
  s.design.t = r.get<double>();
  s.design.p_case = r.get<double>();
  s.design.p_control = r.get<double>();
  s.lp.eta_star = r.get<double>();
  s.lp.sigma_sq = r.get<double>();
  s.config.K = s.design.K;
  s.config.P = s.design.P;
  s.config.eta_star = s.lp.eta_star;
  s.config.n_loci = loci;

  auto& sample = s.sample;
  const auto n_dropped = r.get<std::uint64_t>();
  if (n_dropped > loci) throw IoError("dropped-locus count exceeds the locus count");
  sample.dropped_loci.resize(n_dropped);
  for (auto& k : sample.dropped_loci) {
    k = r.get<std::uint64_t>();
    if (k >= loci) throw IoError("dropped locus index out of range");
  }
  sample.indices.resize(n);
  for (auto& idx : sample.indices) idx = r.get<std::uint64_t>();
  sample.y.resize(n);
  r.raw(sample.y.data(), n);
  sample.w.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) sample.w[static_cast<Eigen::Index>(i)] = r.get<double>();
  for (auto v : sample.y) {
    if (v > 1) throw IoError("phenotype values must be 0 or 1");
    v ? ++sample.n_cases : ++sample.n_controls;
  }
  s.raw.values = r.row_major(n, loci);
  sample.z_study = r.row_major(n, loci - n_dropped);
  r.expect_end();
  return s;
}

void write_dataset(const fs::path& path, const SimulatedStudy& study) {
  write_file_atomic(path, encode_dataset(study));
}

SimulatedStudy read_dataset(const fs::path& path) {
  try {
    return decode_dataset(read_file(path));
  } catch (const IoError& e) {
    throw IoError("'" + path.string() + "': " + e.what());
  }
}

std::string encode_grm(const GrmView& g) {
  Writer w;
  w.raw(kGrmMagic, 8);
  w.put<std::uint32_t>(kVersion);
  w.put<std::uint32_t>(kKindGrm);
  w.put<std::uint64_t>(g.size());
  w.put<std::uint64_t>(g.n_loci);
  w.row_major(g.g);
  return w.take();
}

GrmView decode_grm(std::string_view bytes) {
  Reader r(bytes);
  check_header(r, kGrmMagic, kKindGrm);
  const auto n = r.get<std::uint64_t>();
  GrmView g;
  g.n_loci = r.get<std::uint64_t>();
  g.g = r.row_major(n, n);
  r.expect_end();
  return g;
}

std::string matrix_to_csv(const Matrix& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

}  // namespace herit
