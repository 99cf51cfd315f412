#pragma once

// Model checkpoints: one JSON document holding the format tag and version,
// the model configuration, schema and clause text, every named parameter
// matrix (row-major, shortest round-trip decimals) and free-form string
// metadata. Keys are written in a fixed order so equal models give equal
// bytes.
//
//   {
//     "format": "kenn-checkpoint", "version": 1,
//     "kind": "flat" | "relational",
//     "config": {...}, "schema": "...", "knowledge": "...",
//     "parameters": [{"name": ..., "rows": r, "cols": c, "data": [...]}, ...],
//     "meta": {"key": "value", ...}
//   }

#include <iosfwd>
#include <map>
#include <string>
#include <variant>

#include "kenn/model.hpp"

namespace kenn {

inline constexpr int kCheckpointVersion = 1;

using CheckpointMeta = std::map<std::string, std::string>;

void save_checkpoint(std::ostream& out, const KennModel& model, const CheckpointMeta& meta = {});
void save_checkpoint(std::ostream& out, const RelationalKennModel& model, const CheckpointMeta& meta = {});

struct LoadedCheckpoint {
  std::variant<KennModel, RelationalKennModel> model;
  CheckpointMeta meta;
};

/// Throws ParseError on malformed input or an unsupported version.
LoadedCheckpoint load_checkpoint(std::istream& in);

}  // namespace kenn
