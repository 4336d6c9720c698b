#pragma once

// Binary containers for trained models and initializations.
//
//   LinearAutoencoder: "LSAE" | u32 version | u32 d | A (d*d f64) | B (d*d f64)
//   SpectralInit:      "LSSI" | u32 version | u32 d | u32 degree | u32 flags |
//                      U_X (d*d f64) | sigma_a0 | sigma_b0 | data_sigma (d f64 each)
//
// flags bit 0 is plus_identity.
//
// Integers and doubles are little-endian; matrices are column-major. The
// autoencoder container holds square d x d weights only.

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "lsa/autoencoder.hpp"

namespace lsa {

inline constexpr std::uint32_t kModelFormatVersion = 1;

void write_autoencoder(std::ostream& out, const LinearAutoencoder& ae);
LinearAutoencoder read_autoencoder(std::istream& in);
void save_autoencoder(const std::filesystem::path& path, const LinearAutoencoder& ae);
LinearAutoencoder load_autoencoder(const std::filesystem::path& path);

void write_spectral_init(std::ostream& out, const SpectralInit& init);
SpectralInit read_spectral_init(std::istream& in);
void save_spectral_init(const std::filesystem::path& path, const SpectralInit& init);
SpectralInit load_spectral_init(const std::filesystem::path& path);

}  // namespace lsa
