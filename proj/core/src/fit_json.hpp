#pragma once

#include <json.hpp>

#include "voltpath/models.hpp"

namespace voltpath::detail {

// Shared by the standalone fit files and the fit object embedded in
// instance files.
nlohmann::json fit_to_json(const LinearFit& fit);
LinearFit fit_from_json(const nlohmann::json& doc);

}  // namespace voltpath::detail
