#include "lsa/model_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "lsa/errors.hpp"

namespace lsa {
namespace {

constexpr std::array<char, 4> kAutoencoderMagic{'L', 'S', 'A', 'E'};
constexpr std::array<char, 4> kInitMagic{'L', 'S', 'S', 'I'};

void put_u32(std::ostream& out, std::uint32_t v) {
  std::array<char, 4> bytes{};
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  out.write(bytes.data(), bytes.size());
}

void put_f64(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  std::array<char, 8> bytes{};
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xffu);
  out.write(bytes.data(), bytes.size());
}

void put_values(std::ostream& out, std::span<const double> values) {
  for (double v : values) put_f64(out, v);
}

void read_exact(std::istream& in, char* dst, std::size_t n) {
  in.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) throw FormatError("model file: unexpected end of data");
}

std::uint32_t get_u32(std::istream& in) {
  std::array<unsigned char, 4> bytes{};
  read_exact(in, reinterpret_cast<char*>(bytes.data()), bytes.size());
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& in) {
  std::array<unsigned char, 8> bytes{};
  read_exact(in, reinterpret_cast<char*>(bytes.data()), bytes.size());
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

std::vector<double> get_values(std::istream& in, std::size_t n) {
  std::vector<double> out(n);
  for (double& v : out) v = get_f64(in);
  return out;
}

std::uint32_t read_header(std::istream& in, const std::array<char, 4>& magic) {
  std::array<char, 4> got{};
  read_exact(in, got.data(), got.size());
  if (got != magic) {
    throw FormatError(std::string("model file: bad magic, expected ") + std::string(magic.data(), magic.size()));
  }
  const std::uint32_t version = get_u32(in);
  if (version != kModelFormatVersion) {
    throw FormatError("model file: unsupported version " + std::to_string(version));
  }
  const std::uint32_t d = get_u32(in);
  if (d == 0) throw FormatError("model file: zero dimension");
  return d;
}

std::uint32_t checked_dim(std::size_t d) {
  if (d == 0 || d > 0xffffffffu) throw ContractError("model file: dimension out of range");
  return static_cast<std::uint32_t>(d);
}

template <class Fn>
void with_output(const std::filesystem::path& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  fn(out);
  if (!out) throw IoError("failed writing " + path.string());
}

template <class Fn>
auto with_input(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return fn(in);
}

}  // namespace

void write_autoencoder(std::ostream& out, const LinearAutoencoder& ae) {
  ae.validate();
  if (!ae.a.is_square()) throw ContractError("write_autoencoder: only square d x d weights are supported");
  out.write(kAutoencoderMagic.data(), kAutoencoderMagic.size());
  put_u32(out, kModelFormatVersion);
  put_u32(out, checked_dim(ae.a.rows()));
  put_values(out, ae.a.data());
  put_values(out, ae.b.data());
}

LinearAutoencoder read_autoencoder(std::istream& in) {
  const std::size_t d = read_header(in, kAutoencoderMagic);
  LinearAutoencoder ae;
  try {
    ae.a = DenseMatrix(d, d, get_values(in, d * d));
    ae.b = DenseMatrix(d, d, get_values(in, d * d));
  } catch (const ContractError& e) {
    throw FormatError(std::string("model file: ") + e.what());
  }
  return ae;
}

void save_autoencoder(const std::filesystem::path& path, const LinearAutoencoder& ae) {
  with_output(path, [&](std::ostream& out) { write_autoencoder(out, ae); });
}

LinearAutoencoder load_autoencoder(const std::filesystem::path& path) {
  return with_input(path, [](std::istream& in) { return read_autoencoder(in); });
}

void write_spectral_init(std::ostream& out, const SpectralInit& init) {
  init.validate();
  out.write(kInitMagic.data(), kInitMagic.size());
  put_u32(out, kModelFormatVersion);
  put_u32(out, checked_dim(init.dim()));
  put_u32(out, static_cast<std::uint32_t>(init.degree));
  put_u32(out, init.plus_identity ? 1u : 0u);
  put_values(out, init.u_x.data());
  put_values(out, init.sigma_a0);
  put_values(out, init.sigma_b0);
  put_values(out, init.data_sigma);
}

SpectralInit read_spectral_init(std::istream& in) {
  const std::size_t d = read_header(in, kInitMagic);
  SpectralInit init;
  init.degree = get_u32(in);
  init.plus_identity = (get_u32(in) & 1u) != 0;
  try {
    init.u_x = DenseMatrix(d, d, get_values(in, d * d));
    init.sigma_a0 = get_values(in, d);
    init.sigma_b0 = get_values(in, d);
    init.data_sigma = get_values(in, d);
    init.validate();
  } catch (const ContractError& e) {
    throw FormatError(std::string("init file: ") + e.what());
  }
  return init;
}

void save_spectral_init(const std::filesystem::path& path, const SpectralInit& init) {
  with_output(path, [&](std::ostream& out) { write_spectral_init(out, init); });
}

SpectralInit load_spectral_init(const std::filesystem::path& path) {
  return with_input(path, [](std::istream& in) { return read_spectral_init(in); });
}

}  // namespace lsa
