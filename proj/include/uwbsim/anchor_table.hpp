#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "uwbsim/geometry.hpp"

namespace uwbsim {

/// Provisioned anchor positions, the simulation stand-in for the tag's
/// persistent configuration store.
struct AnchorTable {
  std::map<AnchorId, Point3> entries;
  std::uint64_t version = 0;

  bool contains(AnchorId id) const { return entries.count(id) != 0; }
  std::size_t size() const { return entries.size(); }

  /// Upserts an entry and bumps the version.
  void set(AnchorId id, const Point3& pos);

  /// Removes an entry and bumps the version. Returns false if absent.
  bool remove(AnchorId id);

  friend bool operator==(const AnchorTable&, const AnchorTable&) = default;
};

/// Reads a table from the on-disk format: one `0xNN x y z` line per anchor,
/// `#` comments, and an optional `# version N` header written by store().
/// Throws NotProvisionedError if the file is missing, ParseError (with line
/// number) on malformed lines, ConfigError on duplicate ids.
AnchorTable load_anchor_table(const std::filesystem::path& path);

/// Writes the table so that load(store(t)) == t exactly, version included.
/// Coordinates are printed with shortest round-trip formatting.
void store_anchor_table(const AnchorTable& table, const std::filesystem::path& path);

/// Serialized form of store_anchor_table (exposed for tests and the CLI).
std::string format_anchor_table(const AnchorTable& table);

/// Applies one line of the provisioning protocol:
///   SET <id> <x> <y> <z> | GET <id> | LIST | DEL <id>
/// Returns the (possibly multi-line, for LIST) reply text without trailing
/// newline. Replies start with OK or ERR; the table is only mutated on OK.
std::string apply_command(AnchorTable& table, const std::string& command_line);

/// Formats an id as the protocol's 0xNN form.
std::string format_anchor_id(AnchorId id);

/// Parses 0xNN or decimal anchor ids. Returns nullopt on bad input.
std::optional<AnchorId> parse_anchor_id(const std::string& token);

}  // namespace uwbsim
