#ifndef SELECTORLAB_IO_HPP
#define SELECTORLAB_IO_HPP

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "selectorlab/core.hpp"

namespace selectorlab {

/// "%.17g" rendering; enough digits to round-trip any double.
std::string format_double(double v);

/// CSV with header x_1,...,x_d,y.
void write_dataset_csv(std::ostream& os, const Dataset& data);
Dataset read_dataset_csv(std::istream& is);
void save_dataset_csv(const std::string& path, const Dataset& data);
Dataset load_dataset_csv(const std::string& path);

nlohmann::json vector_to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& j);

nlohmann::json classifier_to_json(const Classifier& c);
Classifier classifier_from_json(const nlohmann::json& j);

/// {d, v, classifier, p_in, p_out, seed}
nlohmann::json planted_model_to_json(const PlantedModel& m);
PlantedModel planted_model_from_json(const nlohmann::json& j);

/// Writes `j.dump(2)` plus a trailing newline.
void save_json(const std::string& path, const nlohmann::json& j);
nlohmann::json load_json(const std::string& path);

}  // namespace selectorlab

#endif
