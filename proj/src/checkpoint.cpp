#include "thinns/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace thinns {
namespace {

constexpr char kMagic[8] = {'T', 'H', 'N', 'S', 'C', 'K', 'P', '1'};

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
    return v;
  }
}

template <class T>
void put(std::ostream& os, T v) {
  v = to_little(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  return to_little(v);
}

}  // namespace

nlohmann::json domain_to_json(const DomainSpec& d) {
  return {{"l1", d.l1}, {"l2", d.l2}, {"eps", d.eps}, {"nu", d.nu},
          {"n1", d.n1}, {"n2", d.n2}, {"n3", d.n3}};
}

DomainSpec domain_from_json(const nlohmann::json& j) {
  DomainSpec d;
  d.l1 = j.at("l1").get<double>();
  d.l2 = j.at("l2").get<double>();
  d.eps = j.at("eps").get<double>();
  d.nu = j.at("nu").get<double>();
  d.n1 = j.at("n1").get<int>();
  d.n2 = j.at("n2").get<int>();
  d.n3 = j.at("n3").get<int>();
  return d;
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  const SpectralField& f = ck.field;
  nlohmann::json header = {
      {"format_version", kCheckpointVersion},
      {"domain", domain_to_json(f.domain())},
      {"components", f.components()},
      {"time", ck.time},
      {"step", ck.step},
      {"index_order", "component,m,n,p (p fastest); indices -n..n"},
      {"coefficient_count", f.coeffs().size()},
      {"extra", ck.extra},
  };
  const std::string text = header.dump();
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("checkpoint: cannot open " + path.string() + " for writing");
  os.write(kMagic, sizeof kMagic);
  put<std::uint64_t>(os, text.size());
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (Eigen::Index i = 0; i < f.coeffs().size(); ++i) {
    put<double>(os, f.coeffs()[i].real());
    put<double>(os, f.coeffs()[i].imag());
  }
  os.flush();
  if (!os) throw std::runtime_error("checkpoint: write failed for " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open " + path.string());
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path.string());
  const auto len = get<std::uint64_t>(is);
  std::string text(len, '\0');
  is.read(text.data(), static_cast<std::streamsize>(len));
  if (!is) throw std::runtime_error("checkpoint: truncated header");
  const auto header = nlohmann::json::parse(text);
  if (header.at("format_version").get<int>() != kCheckpointVersion)
    throw std::runtime_error("checkpoint: unsupported format version");
  const DomainSpec d = domain_from_json(header.at("domain"));
  const int ncomp = header.at("components").get<int>();
  const auto count = header.at("coefficient_count").get<std::int64_t>();
  if (count != static_cast<std::int64_t>(ncomp * d.mode_count()))
    throw std::runtime_error("checkpoint: coefficient count does not match domain");
  CoeffArray c(count);
  for (std::int64_t i = 0; i < count; ++i) {
    const double re = get<double>(is);
    const double im = get<double>(is);
    c[i] = Complex(re, im);
  }
  Checkpoint ck;
  ck.field = SpectralField::from_coefficients(d, ncomp, std::move(c));
  ck.time = header.at("time").get<double>();
  ck.step = header.at("step").get<std::int64_t>();
  ck.extra = header.value("extra", nlohmann::json::object());
  return ck;
}

}  // namespace thinns
