#include "selectorlab/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace selectorlab {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_dataset_csv(std::ostream& os, const Dataset& data) {
  const std::size_t d = data.dim();
  for (std::size_t j = 0; j < d; ++j) os << "x_" << (j + 1) << ',';
  os << "y\n";
  std::string line;
  for (std::size_t i = 0; i < data.size(); ++i) {
    line.clear();
    const auto xi = data.x(i);
    for (std::size_t j = 0; j < d; ++j) {
      line += format_double(xi[static_cast<Eigen::Index>(j)]);
      line += ',';
    }
    line += data.y(i) ? '1' : '0';
    line += '\n';
    os << line;
  }
}

Dataset read_dataset_csv(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw std::runtime_error("dataset csv: missing header");
  std::size_t cols = 1;
  for (char ch : header) cols += ch == ',' ? 1 : 0;
  if (cols < 2 || header.substr(header.rfind(',') + 1) != "y")
    throw std::runtime_error("dataset csv: header must be x_1,...,x_d,y");
  const std::size_t d = cols - 1;

  std::vector<double> values;
  std::vector<std::uint8_t> labels;
  std::string line, cell;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::size_t c = 0;
    while (std::getline(ls, cell, ',')) {
      if (c < d) {
        values.push_back(std::stod(cell));
      } else if (c == d) {
        if (cell != "0" && cell != "1")
          throw std::runtime_error("dataset csv: bad label on line " + std::to_string(lineno));
        labels.push_back(cell == "1" ? 1 : 0);
      }
      ++c;
    }
    if (c != cols)
      throw std::runtime_error("dataset csv: wrong column count on line " + std::to_string(lineno));
  }
  Matrix x(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(d));
  std::copy(values.begin(), values.end(), x.data());
  return Dataset(std::move(x), std::move(labels));
}

void save_dataset_csv(const std::string& path, const Dataset& data) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_dataset_csv(os, data);
}

Dataset load_dataset_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_dataset_csv(is);
}

json vector_to_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vector vector_from_json(const json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

json classifier_to_json(const Classifier& c) {
  struct Visitor {
    json operator()(const Classifier::ConstantRule& r) const {
      return {{"kind", "constant"}, {"label", r.label ? 1 : 0}};
    }
    json operator()(const Classifier::LinearRule& r) const {
      return {{"kind", "linear"}, {"w", vector_to_json(r.w)}, {"t", r.t}};
    }
    json operator()(const Classifier::SparseLinearRule& r) const {
      return {{"kind", "sparse_linear"}, {"support", r.support}, {"weights", r.weights}, {"t", r.t}};
    }
    json operator()(const Classifier::TableRule& r) const {
      json entries = json::array();
      for (const auto& [k, v] : r.entries) entries.push_back({{"x", k}, {"label", v ? 1 : 0}});
      return {{"kind", "table"}, {"entries", entries}, {"fallback", r.fallback ? 1 : 0}};
    }
    json operator()(const Classifier::NegatedRule& r) const {
      return {{"kind", "negation"}, {"inner", classifier_to_json(*r.inner)}};
    }
  };
  return std::visit(Visitor{}, c.rule());
}

Classifier classifier_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "constant") return Classifier::constant(j.at("label").get<int>() != 0);
  if (kind == "linear") return Classifier::linear(vector_from_json(j.at("w")), j.at("t").get<double>());
  if (kind == "sparse_linear")
    return Classifier::sparse_linear(j.at("support").get<std::vector<std::size_t>>(),
                                     j.at("weights").get<std::vector<double>>(),
                                     j.at("t").get<double>());
  if (kind == "table") {
    std::map<std::vector<double>, bool> entries;
    for (const auto& e : j.at("entries"))
      entries[e.at("x").get<std::vector<double>>()] = e.at("label").get<int>() != 0;
    return Classifier::table(std::move(entries), j.at("fallback").get<int>() != 0);
  }
  if (kind == "negation") return Classifier::negation(classifier_from_json(j.at("inner")));
  throw std::runtime_error("unknown classifier kind: " + kind);
}

json planted_model_to_json(const PlantedModel& m) {
  return {{"d", m.d},
          {"v", vector_to_json(m.v.vec())},
          {"classifier", classifier_to_json(m.c_star)},
          {"p_in", m.p_in},
          {"p_out", m.p_out},
          {"seed", m.seed}};
}

PlantedModel planted_model_from_json(const json& j) {
  PlantedModel m{j.at("d").get<std::size_t>(), UnitVector(vector_from_json(j.at("v"))),
                 classifier_from_json(j.at("classifier")), j.at("p_in").get<double>(),
                 j.at("p_out").get<double>(), j.at("seed").get<std::uint64_t>()};
  m.validate();
  return m;
}

void save_json(const std::string& path, const json& j) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << j.dump(2) << '\n';
}

json load_json(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  return json::parse(is);
}

}  // namespace selectorlab
