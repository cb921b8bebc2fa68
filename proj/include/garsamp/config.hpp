#pragma once

#include <array>
#include <optional>
#include <string>

#include <json.hpp>

#include "garsamp/expression.hpp"
#include "garsamp/model.hpp"
#include "garsamp/samplers.hpp"

namespace garsamp {

// A parsed model document. Schema: docs/config.md.
struct ModelConfig {
    std::string name;
    nlohmann::json doc;
    std::optional<ObservationModel> model;
    std::optional<RangeModel2D> model2d;

    std::optional<Expression> transform_inverse;
    int bm2_iterations = 3;
    std::optional<double> gamma_override;
    std::vector<double> ars_init;
    ExtraPointRule extra_point_rule = ExtraPointRule::midpoint;
    std::array<double, 2> oracle_domain{-10.0, 10.0};
    std::size_t oracle_points = 20001;
    nlohmann::json experiment = nlohmann::json::object();
};

// Builds and grid-verifies the model. Throws ModelError / ParameterError.
ModelConfig parse_config(const nlohmann::json& doc);
ModelConfig load_config(const std::string& path);
nlohmann::json read_json_file(const std::string& path);

// Shipped example documents (ids 1-3).
const std::string& builtin_config_text(int id);
nlohmann::json builtin_config_doc(int id);

// RFC 7386 style merge of overrides into a document.
nlohmann::json merge_overrides(nlohmann::json doc, const nlohmann::json& overrides);

}  // namespace garsamp
