#include "sacc/controller_io.h"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "sacc/errors.h"
#include "sacc/ingest.h"

namespace sacc {
namespace {

constexpr char kMagic[8] = {'S', 'A', 'C', 'C', 'C', 'T', 'R', 'L'};
constexpr const char* kTextMagic = "sacc-controller";

template <class T>
void put(std::string& out, T value) {
  static_assert(std::endian::native == std::endian::little,
                "checkpoint I/O assumes a little-endian host");
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <class T>
  T get(const char* what) {
    if (pos_ + sizeof(T) > bytes_.size()) {
      throw FormatError(fmt::format("checkpoint truncated while reading {}", what));
    }
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

ControllerParams shaped(std::uint32_t input_dim, std::uint32_t hidden,
                        std::uint32_t seq_len, double a_lim) {
  if (input_dim != static_cast<std::uint32_t>(kObservationDim)) {
    throw FormatError(fmt::format("unsupported input_dim {}", input_dim));
  }
  if (hidden == 0 || hidden > 4096 || seq_len == 0 || seq_len > 100000) {
    throw FormatError(fmt::format("implausible shape hidden_dim={} seq_len={}",
                                  hidden, seq_len));
  }
  ControllerShape shape;
  shape.hidden_dim = static_cast<int>(hidden);
  shape.seq_len = static_cast<int>(seq_len);
  shape.a_lim = a_lim;
  return ControllerParams::zeros(shape);
}

void checked(ControllerParams& params) {
  try {
    validate(params);
  } catch (const ParameterError& e) {
    throw FormatError(fmt::format("invalid checkpoint: {}", e.what()));
  }
}

double parse_double(const std::string& text, const std::string& key) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw FormatError(fmt::format("bad number '{}' for {}", text, key));
  }
  return value;
}

std::uint32_t parse_uint(const std::string& text, const std::string& key) {
  std::uint32_t value = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw FormatError(fmt::format("bad integer '{}' for {}", text, key));
  }
  return value;
}

}  // namespace

std::string encode_binary(const ControllerParams& params) {
  validate(params);
  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.input_dim));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.hidden_dim));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.seq_len));
  put<double>(out, params.a_lim);
  for (double x : params.normalization.offset) put<double>(out, x);
  for (double x : params.normalization.scale) put<double>(out, x);
  const auto weights = params.flatten();
  put<std::uint64_t>(out, weights.size());
  for (double w : weights) put<double>(out, w);
  return out;
}

ControllerParams decode_binary(const std::string& bytes) {
  if (bytes.size() < sizeof(kMagic) ||
      std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw FormatError("not a controller checkpoint (bad magic)");
  }
  Reader in(bytes);
  for (std::size_t i = 0; i < sizeof(kMagic); ++i) in.get<char>("magic");
  const auto version = in.get<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw FormatError(fmt::format("unsupported checkpoint version {}", version));
  }
  const auto input_dim = in.get<std::uint32_t>("input_dim");
  const auto hidden = in.get<std::uint32_t>("hidden_dim");
  const auto seq_len = in.get<std::uint32_t>("seq_len");
  const double a_lim = in.get<double>("a_lim");
  ControllerParams params = shaped(input_dim, hidden, seq_len, a_lim);
  for (double& x : params.normalization.offset) x = in.get<double>("normalization");
  for (double& x : params.normalization.scale) x = in.get<double>("normalization");
  const auto count = in.get<std::uint64_t>("weight count");
  if (count != params.parameter_count()) {
    throw FormatError(fmt::format("checkpoint holds {} weights, shape needs {}",
                                  count, params.parameter_count()));
  }
  std::vector<double> weights(count);
  for (double& w : weights) w = in.get<double>("weights");
  if (!in.at_end()) throw FormatError("trailing bytes after checkpoint weights");
  params.unflatten(weights);
  checked(params);
  return params;
}

std::string encode_text(const ControllerParams& params) {
  validate(params);
  std::string out = fmt::format("{} = {}\n", kTextMagic, kCheckpointVersion);
  out += fmt::format("input_dim = {}\n", params.input_dim);
  out += fmt::format("hidden_dim = {}\n", params.hidden_dim);
  out += fmt::format("seq_len = {}\n", params.seq_len);
  out += fmt::format("a_lim = {}\n", format_double(params.a_lim));
  auto join = [](std::span<const double> xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i) s += ' ';
      s += format_double(xs[i]);
    }
    return s;
  };
  out += fmt::format("norm_offset = {}\n", join(params.normalization.offset));
  out += fmt::format("norm_scale = {}\n", join(params.normalization.scale));
  out += fmt::format("weights = {}\n", join(params.flatten()));
  return out;
}

ControllerParams decode_text(const std::string& text) {
  std::map<std::string, std::string> fields;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) {
      throw FormatError(fmt::format("malformed checkpoint line '{}'", line));
    }
    fields[line.substr(0, eq)] = line.substr(eq + 3);
  }
  auto field = [&](const std::string& key) -> const std::string& {
    auto it = fields.find(key);
    if (it == fields.end()) throw FormatError("checkpoint lacks " + key);
    return it->second;
  };
  auto numbers = [&](const std::string& key) {
    std::vector<double> out;
    std::istringstream words(field(key));
    std::string word;
    while (words >> word) out.push_back(parse_double(word, key));
    return out;
  };

  if (parse_uint(field(kTextMagic), kTextMagic) != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + field(kTextMagic));
  }
  ControllerParams params = shaped(parse_uint(field("input_dim"), "input_dim"),
                                   parse_uint(field("hidden_dim"), "hidden_dim"),
                                   parse_uint(field("seq_len"), "seq_len"),
                                   parse_double(field("a_lim"), "a_lim"));
  const auto offset = numbers("norm_offset");
  const auto scale = numbers("norm_scale");
  if (offset.size() != kObservationDim || scale.size() != kObservationDim) {
    throw FormatError("normalization needs three offsets and three scales");
  }
  std::copy(offset.begin(), offset.end(), params.normalization.offset.begin());
  std::copy(scale.begin(), scale.end(), params.normalization.scale.begin());
  const auto weights = numbers("weights");
  if (weights.size() != params.parameter_count()) {
    throw FormatError(fmt::format("checkpoint holds {} weights, shape needs {}",
                                  weights.size(), params.parameter_count()));
  }
  params.unflatten(weights);
  checked(params);
  return params;
}

void save_controller(const std::filesystem::path& path,
                     const ControllerParams& params) {
  const bool text = path.extension() == ".txt";
  const std::string bytes = text ? encode_text(params) : encode_binary(params);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

ControllerParams load_controller(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();
  if (bytes.size() >= sizeof(kMagic) &&
      std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) == 0) {
    return decode_binary(bytes);
  }
  return decode_text(bytes);
}

}  // namespace sacc
