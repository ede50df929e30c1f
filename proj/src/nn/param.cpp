#include "dmca/nn/param.hpp"

#include <fstream>
#include <sstream>

#include "dmca/util/csv.hpp"
#include "dmca/util/errors.hpp"

namespace dmca::nn {

void soft_update(const ParamRefs& target, const ParamRefs& online, double tau) {
  if (target.size() != online.size())
    throw StateError("soft_update: parameter lists differ in length");
  for (size_t i = 0; i < target.size(); ++i) {
    if (target[i]->value.rows() != online[i]->value.rows() ||
        target[i]->value.cols() != online[i]->value.cols())
      throw StateError("soft_update: shape mismatch for " + target[i]->name);
    target[i]->value = tau * online[i]->value + (1.0 - tau) * target[i]->value;
  }
}

void copy_values(const ParamRefs& target, const ParamRefs& online) {
  soft_update(target, online, 1.0);
}

void save_params(const std::string& path, const ParamRefs& params,
                 const std::vector<std::pair<std::string, std::string>>& meta) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  out << "DMCA_PARAMS 1\n";
  for (const auto& [k, v] : meta) out << "meta " << k << " " << v << "\n";
  for (const Param* p : params) {
    out << "param " << p->name << " " << p->value.rows() << " " << p->value.cols() << "\n";
    for (long r = 0; r < p->value.rows(); ++r) {
      for (long c = 0; c < p->value.cols(); ++c) {
        if (c) out << " ";
        out << format_double(p->value(r, c));
      }
      out << "\n";
    }
  }
}

std::vector<std::pair<std::string, std::string>> load_params(const std::string& path,
                                                             const ParamRefs& params) {
  std::ifstream in(path);
  if (!in) throw MissingArtifactError("checkpoint not found: " + path);
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "DMCA_PARAMS" || version != 1)
    throw DataError("bad checkpoint header in " + path);

  std::vector<std::pair<std::string, std::string>> meta;
  size_t next = 0;
  std::string tag;
  while (in >> tag) {
    if (tag == "meta") {
      std::string k, v;
      in >> k >> v;
      meta.emplace_back(k, v);
    } else if (tag == "param") {
      std::string name;
      long rows = 0, cols = 0;
      in >> name >> rows >> cols;
      if (next >= params.size())
        throw DataError("checkpoint has more parameters than expected: " + path);
      Param* p = params[next++];
      if (p->name != name || p->value.rows() != rows || p->value.cols() != cols)
        throw DataError("checkpoint parameter mismatch at '" + name + "' in " + path);
      for (long r = 0; r < rows; ++r)
        for (long c = 0; c < cols; ++c)
          if (!(in >> p->value(r, c))) throw DataError("truncated checkpoint: " + path);
    } else {
      throw DataError("unexpected token '" + tag + "' in " + path);
    }
  }
  if (next != params.size()) throw DataError("checkpoint missing parameters: " + path);
  return meta;
}

}  // namespace dmca::nn
