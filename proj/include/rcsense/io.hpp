#pragma once

// File formats: signal CSV, mono WAV, trajectory and packet-analysis tables.
// Column orders are documented in docs/formats.md.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "rcsense/analysis.hpp"
#include "rcsense/signal.hpp"
#include "rcsense/sweet.hpp"

namespace rcsense {

/// Shortest decimal text that parses back to the same double.
[[nodiscard]] std::string format_number(double x);

/// Header `time_s,value`; one row per sample.
void write_signal_csv(const std::filesystem::path& path, const Signal& signal);

/// Reads a signal CSV. The sample rate comes from the time step, which must
/// be constant to relative 1e-6. Needs at least two rows.
[[nodiscard]] Signal read_signal_csv(const std::filesystem::path& path);

enum class WavFormat { pcm16, float32 };

/// Mono WAV. PCM samples are clipped to [-1, 1] before quantisation.
void write_wav(const std::filesystem::path& path, const Signal& signal,
               WavFormat format = WavFormat::float32);

/// Mono 16-bit PCM or 32-bit float WAV, samples mapped to [-1, 1].
[[nodiscard]] Signal read_wav(const std::filesystem::path& path);

/// Dispatches on the extension (.wav or .csv). For trajectory CSVs
/// (`time_s,drive_v,phi_v,xi_v`) the phi column is returned.
[[nodiscard]] Signal read_recording(const std::filesystem::path& path);

/// Header `time_s,drive_v,phi_v,xi_v`.
void write_trajectory_csv(const std::filesystem::path& path,
                          const SweetTrajectory& trajectory);

/// Header `packet_index,start_time_s,amplitude`.
void write_analysis_csv(const std::filesystem::path& path,
                        const PacketSpectrumSeries& series);

/// Header `A0,tau_c,r_squared` and a single row.
void write_fit_csv(const std::filesystem::path& path, const DecayFit& fit);

/// Writes `text` exactly (binary mode, LF endings preserved).
void write_text(const std::filesystem::path& path, std::string_view text);

[[nodiscard]] std::string read_text(const std::filesystem::path& path);

/// Lowercase hex SHA-256 of a file's bytes.
[[nodiscard]] std::string sha256_file(const std::filesystem::path& path);

}  // namespace rcsense
