#ifndef METAEMB_IO_HPP
#define METAEMB_IO_HPP

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "metaemb/embedding_set.hpp"
#include "metaemb/error.hpp"

namespace metaemb {

/// Keep-predicate over tokens; an empty function keeps everything.
using TokenFilter = std::function<bool(std::string_view)>;

struct LoadOptions {
  std::string name;  // defaults to the file stem
  TokenFilter keep;
};

struct LoadReport {
  std::size_t records = 0;     // records read from the file
  std::size_t duplicates = 0;  // later occurrences dropped (first wins)
  std::size_t filtered = 0;    // rejected by the token filter
};

inline constexpr std::array<char, 4> kNativeMagic = {'M', 'E', 'B', '1'};
inline constexpr std::uint32_t kNativeVersion = 1;

namespace detail {

inline std::string set_name(const std::filesystem::path& path, const LoadOptions& opts) {
  return opts.name.empty() ? path.stem().string() : opts.name;
}

/// Collects rows while applying the token filter and first-wins dedup.
class SetBuilder {
 public:
  SetBuilder(const LoadOptions& opts, LoadReport& report) : opts_(opts), report_(report) {}

  void set_dim(std::size_t d) { dim_ = d; }
  std::size_t dim() const { return dim_; }

  /// Returns the destination for the row, or nullptr if the row is dropped.
  double* begin_row(std::string_view token) {
    ++report_.records;
    if (opts_.keep && !opts_.keep(token)) {
      ++report_.filtered;
      return nullptr;
    }
    if (!seen_.emplace(token).second) {
      ++report_.duplicates;
      return nullptr;
    }
    vocab_.emplace_back(token);
    data_.resize(data_.size() + dim_);
    return data_.data() + data_.size() - dim_;
  }

  EmbeddingSet finish(std::string name) {
    return EmbeddingSet(std::move(name), std::move(vocab_), std::move(data_), dim_);
  }

 private:
  const LoadOptions& opts_;
  LoadReport& report_;
  std::size_t dim_ = 0;
  std::unordered_set<std::string> seen_;
  std::vector<std::string> vocab_;
  std::vector<double> data_;
};

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i == line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

inline bool parse_size(std::string_view s, std::size_t& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

inline std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open '" + path.string() + "' for reading");
  return in;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot open '" + path.string() + "' for writing");
  return out;
}

template <typename T>
void put_le(std::ostream& out, T value) {
  using U = std::make_unsigned_t<std::conditional_t<std::is_floating_point_v<T>,
                                                    std::conditional_t<sizeof(T) == 8, std::int64_t,
                                                                       std::int32_t>,
                                                    T>>;
  U bits = std::bit_cast<U>(value);
  char buf[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    buf[i] = static_cast<char>(bits & 0xFFu);
    bits = static_cast<U>(bits >> 8);
  }
  out.write(buf, sizeof(U));
}

template <typename T>
bool get_le(std::istream& in, T& value) {
  using U = std::make_unsigned_t<std::conditional_t<std::is_floating_point_v<T>,
                                                    std::conditional_t<sizeof(T) == 8, std::int64_t,
                                                                       std::int32_t>,
                                                    T>>;
  unsigned char buf[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(U))) return false;
  U bits = 0;
  for (std::size_t i = sizeof(U); i-- > 0;) bits = static_cast<U>((bits << 8) | buf[i]);
  value = std::bit_cast<T>(bits);
  return true;
}

/// Reads `n` little-endian values of type `Src` into `dst` as doubles.
template <typename Src>
bool read_le_block(std::istream& in, double* dst, std::size_t n) {
  if constexpr (std::endian::native == std::endian::little) {
    if constexpr (std::is_same_v<Src, double>) {
      return static_cast<bool>(in.read(reinterpret_cast<char*>(dst),
                                       static_cast<std::streamsize>(n * sizeof(double))));
    } else {
      std::vector<Src> tmp(n);
      if (!in.read(reinterpret_cast<char*>(tmp.data()),
                   static_cast<std::streamsize>(n * sizeof(Src)))) {
        return false;
      }
      for (std::size_t i = 0; i < n; ++i) dst[i] = static_cast<double>(tmp[i]);
      return true;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      Src v;
      if (!get_le(in, v)) return false;
      dst[i] = static_cast<double>(v);
    }
    return true;
  }
}

inline void check_written(std::ostream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(Errc::io, "write to '" + path.string() + "' failed");
}

}  // namespace detail

/// Loads whitespace-separated text: one token followed by `dim` numbers per
/// line. A leading "<count> <dim>" header line (word2vec text format) is
/// recognised and checked against the record count.
inline EmbeddingSet load_text(const std::filesystem::path& path, const LoadOptions& opts = {},
                              LoadReport* report = nullptr) {
  LoadReport local;
  LoadReport& rep = report ? *report : local;
  rep = {};
  auto in = detail::open_in(path);
  detail::SetBuilder builder(opts, rep);

  std::string line;
  std::size_t lineno = 0;
  std::size_t dim = 0;
  std::size_t header_count = 0;
  bool have_header = false;
  // A first line of two integers is only taken as a header once the next line
  // agrees with its dimension; until then it is held back.
  std::string pending_header;
  bool checking_header = false;
  bool first_line = true;

  auto where = [&](std::size_t n) { return path.string() + ":" + std::to_string(n); };

  auto add_record = [&](std::string_view text, std::size_t n) {
    auto fields = detail::split_fields(text);
    if (fields.size() < 2) {
      throw Error(Errc::format, where(n) + ": expected a token followed by numbers");
    }
    if (dim == 0) {
      dim = fields.size() - 1;
      builder.set_dim(dim);
    }
    if (fields.size() - 1 != dim) {
      if (fields.size() - 1 > dim) {
        // "new york 0.1 0.2": leading non-numeric fields mean the token has a space in it.
        const std::size_t extra = fields.size() - 1 - dim;
        bool token_split = true;
        for (std::size_t k = 1; k <= extra; ++k) {
          double tmp;
          if (detail::parse_double(fields[k], tmp)) token_split = false;
        }
        bool tail_numeric = true;
        for (std::size_t k = extra + 1; k < fields.size(); ++k) {
          double tmp;
          if (!detail::parse_double(fields[k], tmp)) tail_numeric = false;
        }
        if (token_split && tail_numeric) {
          throw Error(Errc::format, where(n) + ": token contains whitespace");
        }
      }
      throw Error(Errc::dimension, where(n) + ": inconsistent dimension " +
                                       std::to_string(fields.size() - 1) + ", expected " +
                                       std::to_string(dim));
    }
    double* row = builder.begin_row(fields[0]);
    double scratch = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      double& dst = row ? row[k] : scratch;
      if (!detail::parse_double(fields[k + 1], dst)) {
        throw Error(Errc::format, where(n) + ": non-numeric field '" + std::string(fields[k + 1]) +
                                      "'");
      }
      if (!std::isfinite(dst)) {
        throw Error(Errc::invalid_value, where(n) + ": non-finite value");
      }
    }
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::split_fields(line).empty()) continue;

    if (first_line) {
      first_line = false;
      auto fields = detail::split_fields(line);
      std::size_t c = 0, d = 0;
      if (fields.size() == 2 && detail::parse_size(fields[0], c) &&
          detail::parse_size(fields[1], d)) {
        pending_header = line;
        header_count = c;
        dim = d;
        checking_header = true;
        continue;
      }
    }
    if (checking_header) {
      checking_header = false;
      if (dim > 0 && detail::split_fields(line).size() == dim + 1) {
        have_header = true;
        builder.set_dim(dim);
      } else {
        dim = 0;
        add_record(pending_header, lineno - 1);
      }
    }
    add_record(line, lineno);
  }
  if (checking_header) {
    // A lone "<int> <int>" line: either a header with no records or a 1-d record.
    if (header_count == 0) {
      if (dim == 0) throw Error(Errc::invalid_value, path.string() + ": dimension must be positive");
      builder.set_dim(dim);
      have_header = true;
    } else {
      dim = 0;
      add_record(pending_header, lineno);
    }
  }
  if (rep.records == 0 && !have_header) {
    throw Error(Errc::empty, path.string() + ": no embedding records");
  }
  if (have_header && rep.records != header_count) {
    throw Error(Errc::format, path.string() + ": header declares " + std::to_string(header_count) +
                                  " records, found " + std::to_string(rep.records));
  }
  return builder.finish(detail::set_name(path, opts));
}

/// Writes one line per token with round-trip (17 significant digit) precision.
inline void save_text(const EmbeddingSet& set, const std::filesystem::path& path) {
  auto out = detail::open_out(path);
  char buf[32];
  for (std::size_t i = 0; i < set.size(); ++i) {
    out << set.token(i);
    for (double x : set.row(i)) {
      int n = std::snprintf(buf, sizeof buf, " %.17g", x);
      out.write(buf, n);
    }
    out << '\n';
  }
  detail::check_written(out, path);
}

/// Loads the word2vec binary format: an ASCII "<count> <dim>\n" header, then
/// per record a space-terminated token and `dim` little-endian float32 values.
inline EmbeddingSet load_word2vec_binary(const std::filesystem::path& path,
                                         const LoadOptions& opts = {},
                                         LoadReport* report = nullptr) {
  LoadReport local;
  LoadReport& rep = report ? *report : local;
  rep = {};
  auto in = detail::open_in(path);

  std::string header;
  if (!std::getline(in, header)) throw Error(Errc::empty, path.string() + ": empty file");
  if (!header.empty() && header.back() == '\r') header.pop_back();
  auto fields = detail::split_fields(header);
  long long count = -1, dim = -1;
  if (fields.size() != 2 ||
      std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), count).ec !=
          std::errc() ||
      std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), dim).ec !=
          std::errc()) {
    throw Error(Errc::format, path.string() + ": malformed header '" + header + "'");
  }
  if (dim <= 0) throw Error(Errc::invalid_value, path.string() + ": dimension must be positive");
  if (count < 0) throw Error(Errc::invalid_value, path.string() + ": negative record count");

  detail::SetBuilder builder(opts, rep);
  builder.set_dim(static_cast<std::size_t>(dim));
  std::vector<double> scratch(static_cast<std::size_t>(dim));
  std::string token;
  for (long long r = 0; r < count; ++r) {
    token.clear();
    int c;
    while ((c = in.get()) != EOF && (c == '\n' || c == '\r')) {
    }
    while (c != EOF && c != ' ') {
      token.push_back(static_cast<char>(c));
      c = in.get();
    }
    if (c == EOF) {
      throw Error(Errc::format, path.string() + ": truncated after " + std::to_string(r) + " of " +
                                    std::to_string(count) + " records");
    }
    double* row = builder.begin_row(token);
    if (!detail::read_le_block<float>(in, row ? row : scratch.data(),
                                      static_cast<std::size_t>(dim))) {
      throw Error(Errc::format, path.string() + ": truncated in record " + std::to_string(r));
    }
    if (row) {
      for (long long k = 0; k < dim; ++k) {
        if (!std::isfinite(row[k])) {
          throw Error(Errc::invalid_value, path.string() + ": non-finite value for '" + token + "'");
        }
      }
    }
  }
  int c;
  while ((c = in.get()) != EOF) {
    if (c != '\n' && c != '\r' && c != ' ') {
      throw Error(Errc::format, path.string() + ": more records than the header count " +
                                    std::to_string(count));
    }
  }
  return builder.finish(detail::set_name(path, opts));
}

/// Writes the word2vec binary format. Values are narrowed to float32.
inline void save_word2vec_binary(const EmbeddingSet& set, const std::filesystem::path& path) {
  auto out = detail::open_out(path);
  out << set.size() << ' ' << set.dim() << '\n';
  for (std::size_t i = 0; i < set.size(); ++i) {
    out << set.token(i) << ' ';
    for (double x : set.row(i)) detail::put_le(out, static_cast<float>(x));
    out << '\n';
  }
  detail::check_written(out, path);
}

/// Native container: "MEB1", u32 version, u32 dim, u64 count, u32
/// length-prefixed tokens, then count*dim little-endian float64 row-major.
inline void save_native(const EmbeddingSet& set, const std::filesystem::path& path) {
  auto out = detail::open_out(path);
  out.write(kNativeMagic.data(), kNativeMagic.size());
  detail::put_le(out, kNativeVersion);
  detail::put_le(out, static_cast<std::uint32_t>(set.dim()));
  detail::put_le(out, static_cast<std::uint64_t>(set.size()));
  for (const auto& t : set.vocab()) {
    detail::put_le(out, static_cast<std::uint32_t>(t.size()));
    out.write(t.data(), static_cast<std::streamsize>(t.size()));
  }
  if constexpr (std::endian::native == std::endian::little) {
    auto d = set.data();
    out.write(reinterpret_cast<const char*>(d.data()),
              static_cast<std::streamsize>(d.size() * sizeof(double)));
  } else {
    for (double x : set.data()) detail::put_le(out, x);
  }
  detail::check_written(out, path);
}

inline EmbeddingSet load_native(const std::filesystem::path& path, const LoadOptions& opts = {}) {
  auto in = detail::open_in(path);
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kNativeMagic) {
    throw Error(Errc::format, path.string() + ": not a native embedding container");
  }
  std::uint32_t version = 0, dim = 0;
  std::uint64_t count = 0;
  if (!detail::get_le(in, version) || !detail::get_le(in, dim) || !detail::get_le(in, count)) {
    throw Error(Errc::format, path.string() + ": truncated header");
  }
  if (version != kNativeVersion) {
    throw Error(Errc::format, path.string() + ": unsupported version " + std::to_string(version));
  }
  const std::string name = detail::set_name(path, opts);
  if (dim == 0) {
    if (count != 0) throw Error(Errc::invalid_value, path.string() + ": zero dimension");
    return EmbeddingSet().renamed(name);
  }
  std::vector<std::string> vocab;
  vocab.reserve(static_cast<std::size_t>(count));
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint32_t len = 0;
    if (!detail::get_le(in, len)) throw Error(Errc::format, path.string() + ": truncated tokens");
    std::string t(len, '\0');
    if (!in.read(t.data(), len)) throw Error(Errc::format, path.string() + ": truncated tokens");
    vocab.push_back(std::move(t));
  }
  std::vector<double> data(static_cast<std::size_t>(count) * dim);
  if (!detail::read_le_block<double>(in, data.data(), data.size())) {
    throw Error(Errc::format, path.string() + ": truncated matrix");
  }
  if (in.peek() != EOF) throw Error(Errc::format, path.string() + ": trailing bytes");
  return EmbeddingSet(name, std::move(vocab), std::move(data), dim);
}

enum class Format { text, word2vec, native };

inline Format parse_format(std::string_view s) {
  if (s == "text" || s == "glove") return Format::text;
  if (s == "word2vec" || s == "w2v" || s == "bin") return Format::word2vec;
  if (s == "native" || s == "meb") return Format::native;
  throw Error(Errc::config, "unknown format '" + std::string(s) + "'");
}

inline EmbeddingSet load(const std::filesystem::path& path, Format fmt,
                         const LoadOptions& opts = {}, LoadReport* report = nullptr) {
  switch (fmt) {
    case Format::text: return load_text(path, opts, report);
    case Format::word2vec: return load_word2vec_binary(path, opts, report);
    case Format::native: {
      auto s = load_native(path, opts);
      if (report) *report = LoadReport{s.size(), 0, 0};
      return s;
    }
  }
  throw Error(Errc::config, "unknown format");
}

}  // namespace metaemb

#endif  // METAEMB_IO_HPP
