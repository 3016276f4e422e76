#include "roadnav/nn/weights_io.h"

#include <cstring>

#include "roadnav/common/error.h"
#include "roadnav/common/json_util.h"

namespace roadnav::nn {
namespace {

constexpr char kMagic[4] = {'M', 'A', 'V', 'W'};
constexpr std::size_t kHeader = 4 + 4 + 32;

std::vector<Tensor*> slot_tensors(std::vector<LayerParams>& params) {
  std::vector<Tensor*> out;
  for (LayerParams& p : params) {
    for (Tensor* t : {&p.weights, &p.bias, &p.running_mean, &p.running_var}) {
      if (!t->data.empty()) out.push_back(t);
    }
  }
  return out;
}

}  // namespace

std::string encode_weights(const Network& net) {
  std::vector<LayerParams> params = net.params();
  std::string out(kHeader, '\0');
  std::memcpy(out.data(), kMagic, 4);
  std::memcpy(out.data() + 4, &kWeightsVersion, 4);
  const Digest d = net.spec().digest();
  std::memcpy(out.data() + 8, d.data(), d.size());
  for (const Tensor* t : slot_tensors(params)) {
    const std::size_t at = out.size();
    out.resize(at + t->size() * sizeof(double));
    std::memcpy(out.data() + at, t->data.data(), t->size() * sizeof(double));
  }
  return out;
}

Network decode_weights(const std::string& bytes, const NetworkSpec& spec) {
  if (bytes.size() < kHeader || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw CorruptFile("weights: bad magic or truncated header");
  }
  std::uint32_t version = 0;
  std::memcpy(&version, bytes.data() + 4, 4);
  if (version != kWeightsVersion) {
    throw CorruptFile("weights: unsupported version " + std::to_string(version));
  }
  Digest stored;
  std::memcpy(stored.data(), bytes.data() + 8, stored.size());
  if (stored != spec.digest()) {
    throw IncompatibleWeights("weights: spec digest mismatch (file " + to_hex(stored) +
                              ", spec " + to_hex(spec.digest()) + ")");
  }
  // Shapes come from a freshly built network; seed is irrelevant because
  // every value is overwritten.
  Network net = build_network(spec, 0);
  std::vector<LayerParams> params = net.params();
  std::size_t pos = kHeader;
  for (Tensor* t : slot_tensors(params)) {
    const std::size_t n = t->size() * sizeof(double);
    if (bytes.size() < pos + n) throw CorruptFile("weights: truncated tensor data");
    std::memcpy(t->data.data(), bytes.data() + pos, n);
    pos += n;
  }
  if (pos != bytes.size()) throw CorruptFile("weights: trailing bytes after tensor data");
  return Network(spec, std::move(params), 0);
}

void save_weights(const Network& net, const std::filesystem::path& path) {
  write_file_atomic(path, encode_weights(net));
}

Network load_weights(const std::filesystem::path& path, const NetworkSpec& spec) {
  return decode_weights(read_text_file(path), spec);
}

}  // namespace roadnav::nn
