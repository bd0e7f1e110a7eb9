// Copyright 2026 The groundlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "groundlab/nn/checkpoint.hpp"

#include <cstring>

#include "groundlab/core/error.hpp"
#include "groundlab/core/fileio.hpp"

namespace groundlab::nn {

namespace {

constexpr char kMagic[4] = {'G', 'L', 'C', 'K'};

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T take(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw Error(Errc::io_error, "checkpoint truncated");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

struct Parsed {
  CheckpointHeader header;
  nlohmann::json tensors;
  std::size_t data_offset = 0;
};

Parsed parse(const std::string& bytes, const std::filesystem::path& path) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(Errc::io_error, "not a checkpoint: " + path.string());
  }
  std::size_t pos = 4;
  const auto version = take<std::uint32_t>(bytes, pos);
  if (version != kCheckpointVersion) {
    throw Error(Errc::version_mismatch, path.string() + " has checkpoint version " + std::to_string(version));
  }
  const auto len = take<std::uint64_t>(bytes, pos);
  if (pos + len > bytes.size()) throw Error(Errc::io_error, "checkpoint header truncated");
  const auto header = nlohmann::json::parse(bytes.substr(pos, len));
  Parsed p;
  p.header.kind = header.at("kind").get<std::string>();
  p.header.meta = header.at("meta");
  p.tensors = header.at("tensors");
  p.data_offset = pos + len;
  return p;
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const std::string& kind,
                      const nlohmann::json& meta, const ParamList& params) {
  nlohmann::json tensors = nlohmann::json::array();
  for (const auto& p : params) {
    tensors.push_back({{"name", p.name}, {"rows", p.value->rows()}, {"cols", p.value->cols()}});
  }
  const std::string header = nlohmann::json{{"kind", kind}, {"meta", meta}, {"tensors", tensors}}.dump();
  std::string out(kMagic, 4);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, header.size());
  out += header;
  for (const auto& p : params) {
    out.append(reinterpret_cast<const char*>(p.value->data()),
               sizeof(Real) * static_cast<std::size_t>(p.value->size()));
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  write_text(path, out);
}

CheckpointHeader read_checkpoint_header(const std::filesystem::path& path) {
  return parse(read_text(path), path).header;
}

CheckpointHeader read_checkpoint(const std::filesystem::path& path, const std::string& kind,
                                 const ParamList& params) {
  const std::string bytes = read_text(path);
  Parsed p = parse(bytes, path);
  if (p.header.kind != kind) {
    throw Error(Errc::io_error, path.string() + " holds a " + p.header.kind + " checkpoint, expected " + kind);
  }
  if (p.tensors.size() != params.size()) {
    throw Error(Errc::shape_mismatch, "checkpoint tensor count differs from model");
  }
  std::size_t pos = p.data_offset;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& t = p.tensors[i];
    Mat& m = *params[i].value;
    if (t.at("name").get<std::string>() != params[i].name || t.at("rows").get<Eigen::Index>() != m.rows() ||
        t.at("cols").get<Eigen::Index>() != m.cols()) {
      throw Error(Errc::shape_mismatch, "checkpoint tensor " + t.at("name").get<std::string>());
    }
    const std::size_t n = sizeof(Real) * static_cast<std::size_t>(m.size());
    if (pos + n > bytes.size()) throw Error(Errc::io_error, "checkpoint data truncated");
    std::memcpy(m.data(), bytes.data() + pos, n);
    pos += n;
  }
  if (pos != bytes.size()) throw Error(Errc::io_error, "trailing bytes in checkpoint");
  return p.header;
}

}  // namespace groundlab::nn
