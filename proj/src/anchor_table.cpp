#include "uwbsim/anchor_table.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "uwbsim/detail/format.hpp"
#include "uwbsim/errors.hpp"

namespace uwbsim {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) {
    tokens.push_back(tok);
  }
  return tokens;
}

bool parse_coordinate(const std::string& token, double& out) {
  return detail::parse_double(token, out) && std::isfinite(out);
}

}  // namespace

void AnchorTable::set(AnchorId id, const Point3& pos) {
  entries[id] = pos;
  ++version;
}

bool AnchorTable::remove(AnchorId id) {
  if (entries.erase(id) == 0) {
    return false;
  }
  ++version;
  return true;
}

std::string format_anchor_id(AnchorId id) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "0x%02x", id.value);
  return buf;
}

std::optional<AnchorId> parse_anchor_id(const std::string& token) {
  if (token.empty()) return std::nullopt;
  unsigned value = 0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  int base = 10;
  if (token.size() > 2 && token[0] == '0' && (token[1] == 'x' || token[1] == 'X')) {
    first += 2;
    base = 16;
  }
  auto res = std::from_chars(first, last, value, base);
  if (res.ec != std::errc{} || res.ptr != last || value > 0xff) {
    return std::nullopt;
  }
  return AnchorId{static_cast<std::uint8_t>(value)};
}

AnchorTable load_anchor_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw NotProvisionedError("anchor table not provisioned: " + path.string());
  }

  AnchorTable table;
  std::string line;
  int line_no = 0;
  bool version_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      // store() puts the version in a `# version N` header comment.
      auto tokens = split_ws(line.substr(1));
      std::uint64_t v = 0;
      if (!version_seen && tokens.size() == 2 && tokens[0] == "version" &&
          detail::parse_uint64(tokens[1], v)) {
        table.version = v;
        version_seen = true;
      }
      continue;
    }
    auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens.size() != 4) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected `id x y z`");
    }
    auto id = parse_anchor_id(tokens[0]);
    Point3 pos;
    if (!id || !parse_coordinate(tokens[1], pos.x) || !parse_coordinate(tokens[2], pos.y) ||
        !parse_coordinate(tokens[3], pos.z)) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": malformed anchor line");
    }
    if (table.contains(*id)) {
      throw ConfigError("duplicate anchor " + format_anchor_id(*id) + " at " + path.string() +
                        ":" + std::to_string(line_no));
    }
    table.entries[*id] = pos;
  }
  return table;
}

std::string format_anchor_table(const AnchorTable& table) {
  std::string out = "# version " + std::to_string(table.version) + "\n";
  for (const auto& [id, pos] : table.entries) {
    out += format_anchor_id(id);
    out += ' ';
    out += detail::format_double(pos.x);
    out += ' ';
    out += detail::format_double(pos.y);
    out += ' ';
    out += detail::format_double(pos.z);
    out += '\n';
  }
  return out;
}

void store_anchor_table(const AnchorTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw IoError("cannot write anchor table: " + path.string());
  }
  out << format_anchor_table(table);
  out.flush();
  if (!out) {
    throw IoError("write failed: " + path.string());
  }
}

std::string apply_command(AnchorTable& table, const std::string& command_line) {
  auto tokens = split_ws(command_line);
  if (tokens.empty()) {
    return "ERR unknown-command";
  }
  const std::string& verb = tokens[0];

  if (verb == "SET") {
    if (tokens.size() != 5) return "ERR parse";
    auto id = parse_anchor_id(tokens[1]);
    Point3 pos;
    if (!id || !parse_coordinate(tokens[2], pos.x) || !parse_coordinate(tokens[3], pos.y) ||
        !parse_coordinate(tokens[4], pos.z)) {
      return "ERR parse";
    }
    table.set(*id, pos);
    return "OK";
  }

  if (verb == "GET") {
    if (tokens.size() != 2) return "ERR parse";
    auto id = parse_anchor_id(tokens[1]);
    if (!id) return "ERR parse";
    auto it = table.entries.find(*id);
    if (it == table.entries.end()) return "ERR not-found";
    return "OK " + format_anchor_id(*id) + " " + detail::format_double(it->second.x) + " " +
           detail::format_double(it->second.y) + " " + detail::format_double(it->second.z);
  }

  if (verb == "LIST") {
    if (tokens.size() != 1) return "ERR parse";
    if (table.entries.empty()) return "OK 0 anchors";
    std::string out;
    bool first = true;
    for (const auto& [id, pos] : table.entries) {
      if (!first) out += '\n';
      first = false;
      out += format_anchor_id(id) + " " + detail::format_double(pos.x) + " " +
             detail::format_double(pos.y) + " " + detail::format_double(pos.z);
    }
    return out;
  }

  if (verb == "DEL") {
    if (tokens.size() != 2) return "ERR parse";
    auto id = parse_anchor_id(tokens[1]);
    if (!id) return "ERR parse";
    if (!table.remove(*id)) return "ERR not-found";
    return "OK";
  }

  return "ERR unknown-command";
}

}  // namespace uwbsim
