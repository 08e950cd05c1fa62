#pragma once

#include <string>

#include <json.hpp>

#include "symld/measure.hpp"
#include "symld/transport.hpp"

namespace symld {

using Json = nlohmann::json;

Json alphabet_to_json(const Alphabet& a);
AlphabetPtr alphabet_from_json(const Json& j);

// {"points": [...], "weights": {"id": w | {"num": "...", "den": "..."}}}
Json measure_to_json(const DiscreteMeasure& m);
DiscreteMeasure measure_from_json(const Json& j);

// {"points": [...], "pair_weights": [{"x": id, "y": id, "w": ...}]}
Json pair_measure_to_json(const PairMeasure& m);
PairMeasure pair_measure_from_json(const Json& j);

// {"points": [...], "sample": [id, id, ...]}
Json sample_to_json(const IndexedSample& s);
IndexedSample sample_from_json(const Json& j);

// {"points": [...], "atoms": [{"x": id, "y": id}, ...]}
PairAtoms pair_atoms_from_json(const Json& j);

Json transport_plan_to_json(const TransportPlan& plan);
Json assignment_to_json(const AssignmentResult& r);

Json load_json_file(const std::string& path);

// temp file + rename; partial outputs are never observable
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace symld
