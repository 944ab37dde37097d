#include "rcsense/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>
#include <vector>

#include "rcsense/error.hpp"

namespace rcsense {

namespace fs = std::filesystem;

std::string format_number(double x) {
  if (x == 0.0) return "0";  // also folds -0
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view s, const fs::path& path, std::size_t line) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw IoError(path.string() + ":" + std::to_string(line) +
                  ": cannot parse number '" + std::string(s) + "'");
  }
  return v;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;
};

CsvTable read_csv(const fs::path& path) {
  std::ifstream in = open_in(path);
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line, ',');
    if (t.header.empty()) {
      for (auto c : cells) t.header.emplace_back(c);
      t.columns.resize(t.header.size());
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                    std::to_string(t.header.size()) + " fields, found " +
                    std::to_string(cells.size()));
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
      t.columns[i].push_back(parse_double(cells[i], path, lineno));
    }
  }
  if (t.header.empty()) throw IoError("'" + path.string() + "' is empty");
  return t;
}

double rate_from_times(const std::vector<double>& t, const fs::path& path) {
  if (t.size() < 2) {
    throw IoError("'" + path.string() + "' needs at least two samples");
  }
  // Mean step is less sensitive to rounding in printed times than t[1]-t[0].
  const double step = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
  if (!(step > 0.0)) throw IoError("'" + path.string() + "': time must increase");
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (std::abs((t[i] - t[i - 1]) - step) > 1e-6 * step) {
      throw IoError("'" + path.string() + "': time step is not constant at row " +
                    std::to_string(i + 1));
    }
  }
  return 1.0 / step;
}

std::size_t column(const CsvTable& t, std::string_view name, const fs::path& path) {
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (t.header[i] == name) return i;
  }
  throw IoError("'" + path.string() + "' has no column '" + std::string(name) + "'");
}

double snap_rate(double rate) {
  // Times printed in decimal put the recovered rate a few ulps off; snap to
  // the nearest integer (or 1e-6 grid) when that is within 1e-9 relative.
  const double r = std::round(rate);
  if (std::abs(rate - r) <= 1e-9 * rate) return r;
  const double r6 = std::round(rate * 1e6) / 1e6;
  if (std::abs(rate - r6) <= 1e-9 * rate) return r6;
  return rate;
}

void put_u16(std::string& b, std::uint16_t v) {
  b.push_back(static_cast<char>(v & 0xff));
  b.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

void write_signal_csv(const fs::path& path, const Signal& signal) {
  std::ofstream out = open_out(path);
  std::string buf = "time_s,value\n";
  for (std::size_t i = 0; i < signal.size(); ++i) {
    buf += format_number(signal.time(i));
    buf += ',';
    buf += format_number(signal[i]);
    buf += '\n';
  }
  out << buf;
  finish(out, path);
}

Signal read_signal_csv(const fs::path& path) {
  const CsvTable t = read_csv(path);
  const std::size_t tc = column(t, "time_s", path);
  std::size_t vc = t.header.size();
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (t.header[i] == "value") vc = i;
  }
  if (vc == t.header.size()) {
    if (t.header.size() != 2) {
      throw IoError("'" + path.string() + "' has no 'value' column");
    }
    vc = 1 - tc;
  }
  const double rate = snap_rate(rate_from_times(t.columns[tc], path));
  try {
    return Signal(t.columns[vc], rate);
  } catch (const InvalidArgument& e) {
    throw IoError("'" + path.string() + "': " + e.what());
  }
}

void write_wav(const fs::path& path, const Signal& signal, WavFormat format) {
  const double rate = std::round(signal.sample_rate());
  if (std::abs(rate - signal.sample_rate()) > 1e-9 * rate || rate > 4294967295.0) {
    throw InvalidArgument("wav: sample rate must be an integer number of Hz");
  }
  const std::uint16_t bits = format == WavFormat::pcm16 ? 16 : 32;
  const std::uint16_t tag = format == WavFormat::pcm16 ? 1 : 3;
  const std::uint32_t bytes_per_sample = bits / 8;
  const auto data_bytes = static_cast<std::uint32_t>(signal.size() * bytes_per_sample);
  std::string b;
  b.reserve(44 + data_bytes);
  b += "RIFF";
  put_u32(b, 36 + data_bytes);
  b += "WAVEfmt ";
  put_u32(b, 16);
  put_u16(b, tag);
  put_u16(b, 1);
  put_u32(b, static_cast<std::uint32_t>(rate));
  put_u32(b, static_cast<std::uint32_t>(rate) * bytes_per_sample);
  put_u16(b, static_cast<std::uint16_t>(bytes_per_sample));
  put_u16(b, bits);
  b += "data";
  put_u32(b, data_bytes);
  for (double x : signal.samples()) {
    if (format == WavFormat::pcm16) {
      const double c = std::clamp(x, -1.0, 1.0);
      const auto s = static_cast<std::int16_t>(std::lround(std::clamp(c * 32768.0, -32768.0, 32767.0)));
      put_u16(b, static_cast<std::uint16_t>(s));
    } else {
      put_u32(b, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
    }
  }
  std::ofstream out = open_out(path);
  out.write(b.data(), static_cast<std::streamsize>(b.size()));
  finish(out, path);
}

Signal read_wav(const fs::path& path) {
  std::ifstream in = open_in(path);
  const std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(raw.data());
  const std::size_t n = raw.size();
  const std::string name = path.string();
  if (n < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0) {
    throw IoError("'" + name + "' is not a RIFF/WAVE file");
  }
  std::uint16_t tag = 0;
  std::uint16_t channels = 0;
  std::uint32_t rate = 0;
  std::uint16_t bits = 0;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= n) {
    const std::uint32_t size = get_u32(p + pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > n) throw IoError("'" + name + "': truncated chunk");
    if (std::memcmp(p + pos, "fmt ", 4) == 0) {
      if (size < 16) throw IoError("'" + name + "': short fmt chunk");
      tag = get_u16(p + body);
      channels = get_u16(p + body + 2);
      rate = get_u32(p + body + 4);
      bits = get_u16(p + body + 14);
      if (tag == 0xFFFE && size >= 26) tag = get_u16(p + body + 24);
      have_fmt = true;
    } else if (std::memcmp(p + pos, "data", 4) == 0) {
      if (!have_fmt) throw IoError("'" + name + "': data chunk before fmt chunk");
      if (channels != 1) {
        throw IoError("'" + name + "': " + std::to_string(channels) +
                      " channels, only mono is supported");
      }
      if (rate == 0) throw IoError("'" + name + "': zero sample rate");
      std::vector<double> samples;
      if (tag == 1 && bits == 16) {
        samples.resize(size / 2);
        for (std::size_t i = 0; i < samples.size(); ++i) {
          samples[i] = static_cast<std::int16_t>(get_u16(p + body + 2 * i)) / 32768.0;
        }
      } else if (tag == 3 && bits == 32) {
        samples.resize(size / 4);
        for (std::size_t i = 0; i < samples.size(); ++i) {
          samples[i] = std::bit_cast<float>(get_u32(p + body + 4 * i));
          if (!std::isfinite(samples[i])) {
            throw IoError("'" + name + "': non-finite sample at index " + std::to_string(i));
          }
        }
      } else {
        throw IoError("'" + name + "': unsupported encoding (format " + std::to_string(tag) +
                      ", " + std::to_string(bits) + " bit); use 16-bit PCM or 32-bit float");
      }
      return Signal(std::move(samples), static_cast<double>(rate));
    }
    pos = body + size + (size & 1U);
  }
  throw IoError("'" + name + "': no data chunk");
}

Signal read_recording(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".wav") return read_wav(path);
  if (ext != ".csv") {
    throw IoError("'" + path.string() + "': unsupported extension, expected .wav or .csv");
  }
  const CsvTable t = read_csv(path);
  const bool trajectory = std::find(t.header.begin(), t.header.end(), "phi_v") != t.header.end();
  if (!trajectory) return read_signal_csv(path);
  const double rate = snap_rate(rate_from_times(t.columns[column(t, "time_s", path)], path));
  return Signal(t.columns[column(t, "phi_v", path)], rate);
}

void write_trajectory_csv(const fs::path& path, const SweetTrajectory& traj) {
  std::ofstream out = open_out(path);
  std::string buf = "time_s,drive_v,phi_v,xi_v\n";
  constexpr std::size_t chunk = 1 << 20;
  for (std::size_t i = 0; i < traj.phi.size(); ++i) {
    buf += format_number(traj.phi.time(i));
    buf += ',';
    buf += format_number(traj.drive[i]);
    buf += ',';
    buf += format_number(traj.phi[i]);
    buf += ',';
    buf += format_number(traj.xi[i]);
    buf += '\n';
    if (buf.size() > chunk) {
      out << buf;
      buf.clear();
    }
  }
  out << buf;
  finish(out, path);
}

void write_analysis_csv(const fs::path& path, const PacketSpectrumSeries& series) {
  std::ofstream out = open_out(path);
  std::string buf = "packet_index,start_time_s,amplitude\n";
  for (std::size_t i = 0; i < series.entries.size(); ++i) {
    buf += std::to_string(i);
    buf += ',';
    buf += format_number(series.entries[i].start_time);
    buf += ',';
    buf += format_number(series.entries[i].amplitude);
    buf += '\n';
  }
  out << buf;
  finish(out, path);
}

void write_fit_csv(const fs::path& path, const DecayFit& fit) {
  write_text(path, "A0,tau_c,r_squared\n" + format_number(fit.a0) + "," +
                       format_number(fit.tau_c) + "," + format_number(fit.r_squared) + "\n");
}

void write_text(const fs::path& path, std::string_view text) {
  std::ofstream out = open_out(path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  finish(out, path);
}

std::string read_text(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw IoError("sha256: digest initialisation failed");
  }
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    const std::streamsize got = in.gcount();
    if (got > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(got));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xf]);
  }
  return out;
}

}  // namespace rcsense
