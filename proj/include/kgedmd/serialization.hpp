#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include <json.hpp>

#include "kgedmd/features.hpp"
#include "kgedmd/gedmd.hpp"
#include "kgedmd/signal.hpp"

namespace kgedmd {

using Json = nlohmann::json;

inline constexpr const char* kGeneratorSchema = "kgedmd/generator/1";
inline constexpr const char* kDictionarySchema = "kgedmd/dictionary/1";

/// Dense matrix as {"rows", "cols", "re": [...], "im": [...]} (column-major).
Json matrix_to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const Json& j);

Json dictionary_to_json(const Dictionary& dict);
std::shared_ptr<const Dictionary> dictionary_from_json(const Json& j);

Json observable_to_json(const ObservableCoeffs& obs);
ObservableCoeffs observable_from_json(const Json& j);

/// Includes the dictionary, so a stored model can be reloaded standalone.
Json generator_to_json(const GeneratorModel& model);
GeneratorModel generator_from_json(const Json& j);

/// {"step", "input_dim", "values" (interval-major), "descriptor"}.
Json signal_to_json(const InputSignal& signal);
InputSignal signal_from_json(const Json& j);

/// Throws ParseError carrying the 1-based line of a syntax error.
Json parse_json(const std::string& text);
Json load_json(const std::filesystem::path& path);
void save_json(const std::filesystem::path& path, const Json& j);

}  // namespace kgedmd
