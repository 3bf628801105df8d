#pragma once

#include "tripletq/cover.hpp"
#include "tripletq/evaluation.hpp"
#include "tripletq/finite_learner.hpp"
#include "tripletq/maha_learner.hpp"
#include "tripletq/smooth_learners.hpp"

#include <json.hpp>

#include <string>

namespace tripletq {

using Json = nlohmann::json;

Json to_json(const Point& x);
Json to_json(const Matrix& m);  // row-major list of rows
Point point_from_json(const Json& j);
Matrix matrix_from_json(const Json& j);

Json to_json(const RankTable& t);
RankTable rank_table_from_json(const Json& j);

Json to_json(const EpsCover& c);
Json to_json(const MahaModel& m);
MahaModel maha_model_from_json(const Json& j);

Json to_json(const NNDistance& d);
Json to_json(const HybridDistance& d);
Json to_json(const MultiplicativeThresholds& t);

Json to_json(const SmoothnessParams& p);
/// Missing keys keep their defaults; unknown keys are rejected.
SmoothnessParams smoothness_params_from_json(const Json& j);

Json to_json(const AgreementReport& r);
std::string agreement_csv_header();
std::string agreement_csv_row(const AgreementReport& r);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace tripletq
