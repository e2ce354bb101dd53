// Copyright 2026 The AID Authors
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

#include "aid/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "aid/errors.hpp"

namespace aid {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'A', 'I', 'D', 'C', 'K', 'P', 'T', '1'};

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

json meta_json(const CheckpointMeta& m) {
  return json{{"spec", m.spec}, {"config", m.config}, {"seed", m.seed}, {"epoch", m.epoch}};
}

template <typename Params>
void append_arrays(const Params& params, const std::string& prefix, json& table, std::string& blob) {
  for (const auto* p : params) {
    table.push_back({{"name", prefix + p->name}, {"shape", p->shape}, {"offset", blob.size()}, {"count", p->size()}});
    blob.append(reinterpret_cast<const char*>(p->value.data()), p->size() * sizeof(float));
  }
}

template <typename Params>
void restore_arrays(Params params, const std::string& prefix, const std::map<std::string, json>& table,
                    const std::string& blob) {
  for (auto* p : params) {
    auto it = table.find(prefix + p->name);
    if (it == table.end()) throw CheckpointError("checkpoint lacks array '" + prefix + p->name + "'");
    const json& e = it->second;
    if (e.at("shape").get<std::vector<int>>() != p->shape)
      throw CheckpointError("checkpoint array '" + p->name + "' has the wrong shape");
    const auto offset = e.at("offset").get<std::size_t>();
    const auto count = e.at("count").get<std::size_t>();
    if (count != p->size() || offset + count * sizeof(float) > blob.size())
      throw CheckpointError("checkpoint array '" + p->name + "' is truncated");
    std::memcpy(p->value.data(), blob.data() + offset, count * sizeof(float));
  }
}

}  // namespace

void save_checkpoint(const std::string& path, const Detector<float>& model, const CheckpointMeta& meta,
                     const ChannelAdapter<float>* adapter) {
  json table = json::array();
  std::string blob;
  append_arrays(model.params(), "", table, blob);
  json header = meta_json(meta);
  if (adapter) {
    append_arrays(adapter->params(), "student.", table, blob);
    header["adapter"] = {{"in_channels", adapter->in_channels()}, {"out_channels", adapter->out_channels()}};
  }
  header["arrays"] = table;
  const std::string h = header.dump();
  const std::uint64_t hlen = h.size();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ContractError("cannot write checkpoint '" + path + "'");
  out.write(kMagic, sizeof(kMagic));
  out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw ContractError("failed writing checkpoint '" + path + "'");

  std::ofstream manifest(path + ".json", std::ios::trunc);
  manifest << meta_json(meta).dump(2) << "\n";
  if (!manifest) throw ContractError("failed writing checkpoint manifest '" + path + ".json'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("checkpoint '" + path + "' not found or unreadable");
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string bytes = ss.str();
  if (bytes.size() < sizeof(kMagic) + 8 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
    throw CheckpointError("'" + path + "' is not a checkpoint");
  std::uint64_t hlen = 0;
  std::memcpy(&hlen, bytes.data() + sizeof(kMagic), sizeof(hlen));
  const std::size_t start = sizeof(kMagic) + sizeof(hlen);
  if (hlen > bytes.size() - start) throw CheckpointError("checkpoint '" + path + "' is truncated");

  try {
    const json header = json::parse(bytes.substr(start, hlen));
    const std::string blob = bytes.substr(start + hlen);
    Checkpoint ck;
    ck.meta.spec = header.at("spec").get<DetectorSpec>();
    ck.meta.config = header.at("config");
    ck.meta.seed = header.at("seed").get<std::uint64_t>();
    ck.meta.epoch = header.at("epoch").get<int>();
    ck.model = Detector<float>(ck.meta.spec, 0);
    std::map<std::string, json> table;
    for (const auto& e : header.at("arrays")) table[e.at("name").get<std::string>()] = e;
    restore_arrays(ck.model.params(), "", table, blob);
    if (header.contains("adapter")) {
      ck.adapter.emplace(header["adapter"].at("in_channels").get<int>(), header["adapter"].at("out_channels").get<int>(),
                         0);
      restore_arrays(ck.adapter->params(), "student.", table, blob);
    }
    return ck;
  } catch (const json::exception& e) {
    throw CheckpointError("checkpoint '" + path + "' has a corrupt header: " + e.what());
  } catch (const ValidationError& e) {
    throw CheckpointError("checkpoint '" + path + "' holds an invalid spec: " + e.what());
  }
}

std::string parameter_hash(const Detector<float>& model) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const void* data, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto* p : model.params()) {
    feed(p->name.data(), p->name.size());
    feed(p->shape.data(), p->shape.size() * sizeof(int));
    feed(p->value.data(), p->value.size() * sizeof(float));
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace aid
