#include "sgforge/tags.hpp"

#include <algorithm>
#include <charconv>
#include <map>

#include "sgforge/error.hpp"

namespace sgforge {

std::string_view to_string(NodeType t) noexcept {
  switch (t) {
    case NodeType::Subj: return "SUBJ";
    case NodeType::Pred: return "PRED";
    case NodeType::Objt: return "OBJT";
    case NodeType::Attr: return "ATTR";
    case NodeType::Same: return "SAME";
    case NodeType::None: return "NONE";
  }
  return "NONE";
}

std::optional<NodeType> parse_node_type(std::string_view s) noexcept {
  for (NodeType t : kAllNodeTypes)
    if (s == to_string(t)) return t;
  return std::nullopt;
}

std::string_view to_string(DropReason r) noexcept {
  switch (r) {
    case DropReason::SelfReference: return "SelfReference";
    case DropReason::ParentOutOfRange: return "ParentOutOfRange";
    case DropReason::IllegalArc: return "IllegalArc";
    case DropReason::SubjectNotRoot: return "SubjectNotRoot";
    case DropReason::SameCycle: return "SameCycle";
    case DropReason::SameReachesNone: return "SameReachesNone";
    case DropReason::SameReachesRoot: return "SameReachesRoot";
    case DropReason::ParentDropped: return "ParentDropped";
  }
  return "Unknown";
}

TaggedSentence TaggedSentence::from(std::vector<std::tuple<std::string, NodeType, Position>> rows) {
  TaggedSentence s;
  s.tokens.reserve(rows.size());
  Position i = 1;
  for (auto& [form, type, parent] : rows) s.tokens.push_back({i++, std::move(form), type, parent});
  return s;
}

bool arc_legal(NodeType child, ParentKind parent) noexcept {
  switch (child) {
    case NodeType::Subj: return parent.root;
    case NodeType::Pred: return !parent.root && parent.type == NodeType::Subj;
    case NodeType::Objt: return !parent.root && parent.type == NodeType::Pred;
    case NodeType::Attr:
      return !parent.root && (parent.type == NodeType::Subj || parent.type == NodeType::Objt);
    case NodeType::Same: return !parent.root && parent.type != NodeType::None;
    case NodeType::None: return false;
  }
  return false;
}

namespace {

struct SameResolution {
  std::optional<Position> head;  // resolved non-SAME token
  DropReason reason = DropReason::SameCycle;
};

// Follows SAME parent links from token `start` until a non-SAME token.
SameResolution resolve_same(const TaggedSentence& s, Position start) {
  const std::size_t n = s.size();
  Position cur = start;
  for (std::size_t hops = 0; hops <= n; ++hops) {
    const TaggedToken& tok = s.at(cur);
    Position next = tok.parent;
    if (next == kRoot) return {std::nullopt, DropReason::SameReachesRoot};
    if (next > n) return {std::nullopt, DropReason::ParentOutOfRange};
    if (next == cur) return {std::nullopt, cur == start ? DropReason::SelfReference : DropReason::SameCycle};
    const NodeType t = s.at(next).node_type;
    if (t == NodeType::None) return {std::nullopt, DropReason::SameReachesNone};
    if (t != NodeType::Same) return {next, {}};
    cur = next;
  }
  return {std::nullopt, DropReason::SameCycle};
}

}  // namespace

DecodeReport decode_tags_to_graph(const TaggedSentence& s) {
  const std::size_t n = s.size();
  DecodeReport report;

  // Phase 1: SAME resolution. head_of[i] is the resolved head for SAME tokens.
  std::vector<std::optional<Position>> head_of(n + 1);
  std::map<Position, std::vector<Position>> pieces;
  for (const auto& tok : s.tokens) {
    if (tok.node_type != NodeType::Same) continue;
    SameResolution r = resolve_same(s, tok.index);
    if (r.head) {
      head_of[tok.index] = r.head;
      pieces[*r.head].push_back(tok.index);
    } else {
      report.dropped_arcs.push_back({tok.index, r.reason});
    }
  }

  std::vector<std::string> label_of(n + 1);
  for (const auto& tok : s.tokens) {
    if (tok.node_type == NodeType::Same || tok.node_type == NodeType::None) continue;
    auto it = pieces.find(tok.index);
    if (it == pieces.end()) {
      label_of[tok.index] = tok.form;
      continue;
    }
    std::vector<Position> all = it->second;
    std::sort(all.begin(), all.end());
    report.merged_phrases.push_back({tok.index, all});
    all.push_back(tok.index);
    std::sort(all.begin(), all.end());
    std::string label;
    for (Position p : all) {
      if (!label.empty()) label.push_back(' ');
      label += s.at(p).form;
    }
    label_of[tok.index] = std::move(label);
  }

  // Resolved parent of a non-SAME token's arc: SAME parents are replaced by
  // their resolved head; a dropped SAME parent drops the arc.
  auto resolved_parent = [&](const TaggedToken& tok) -> std::optional<Position> {
    if (tok.parent == kRoot || tok.parent > n) return tok.parent;
    if (s.at(tok.parent).node_type == NodeType::Same) return head_of[tok.parent];
    return tok.parent;
  };

  // Phases 2-3: node creation and arc attachment.
  std::vector<ObjectInstance> objects;
  std::vector<bool> arc_ok(n + 1, false);
  std::vector<Position> parent_of(n + 1, kRoot);
  for (const auto& tok : s.tokens) {
    const NodeType t = tok.node_type;
    if (t == NodeType::None || t == NodeType::Same) continue;
    if (t == NodeType::Subj || t == NodeType::Objt)
      objects.push_back({static_cast<ObjectId>(tok.index), Label(label_of[tok.index])});

    if (tok.parent == tok.index) {
      report.dropped_arcs.push_back({tok.index, DropReason::SelfReference});
      continue;
    }
    if (tok.parent > n) {
      report.dropped_arcs.push_back({tok.index, DropReason::ParentOutOfRange});
      continue;
    }
    if (t == NodeType::Subj) {
      if (tok.parent == kRoot) arc_ok[tok.index] = true;
      else report.dropped_arcs.push_back({tok.index, DropReason::SubjectNotRoot});
      continue;
    }
    std::optional<Position> p = resolved_parent(tok);
    if (!p) {
      report.dropped_arcs.push_back({tok.index, DropReason::ParentDropped});
      continue;
    }
    ParentKind kind = *p == kRoot ? ParentKind::Root() : ParentKind::Of(s.at(*p).node_type);
    if (!arc_legal(t, kind)) {
      report.dropped_arcs.push_back({tok.index, DropReason::IllegalArc});
      continue;
    }
    arc_ok[tok.index] = true;
    parent_of[tok.index] = *p;
  }

  // Phase 4: emission.
  std::vector<Attribute> attributes;
  std::vector<Relation> relations;
  for (const auto& tok : s.tokens) {
    if (!arc_ok[tok.index]) continue;
    if (tok.node_type == NodeType::Attr) {
      attributes.push_back({static_cast<ObjectId>(parent_of[tok.index]), Label(label_of[tok.index])});
    } else if (tok.node_type == NodeType::Objt) {
      const Position pred = parent_of[tok.index];
      if (!arc_ok[pred]) continue;
      relations.push_back({static_cast<ObjectId>(parent_of[pred]), Label(label_of[pred]),
                           static_cast<ObjectId>(tok.index)});
    }
  }

  std::stable_sort(report.dropped_arcs.begin(), report.dropped_arcs.end(),
                   [](const DroppedArc& a, const DroppedArc& b) { return a.child < b.child; });
  report.graph = build_graph(std::move(objects), std::move(attributes), std::move(relations));
  return report;
}

// ---------------------------------------------------------------------------
// CONLL

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    cols.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return cols;
}

std::optional<std::size_t> parse_uint(std::string_view s) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

}  // namespace

std::vector<TaggedSentence> read_conll(std::string_view text) {
  std::vector<TaggedSentence> out;
  TaggedSentence current;
  std::vector<std::size_t> line_of;  // source line per token of `current`

  auto flush = [&]() {
    const std::size_t n = current.size();
    for (std::size_t i = 0; i < n; ++i)
      if (current.tokens[i].parent > n)
        throw ParseError(line_of[i], "HEAD " + std::to_string(current.tokens[i].parent) +
                                         " exceeds sentence length " + std::to_string(n));
    if (n > 0) out.push_back(std::move(current));
    current = {};
    line_of.clear();
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (line.empty()) {
      flush();
      continue;
    }
    auto cols = split_tabs(line);
    if (cols.size() != 5) throw ParseError(line_no, "expected 5 tab-separated columns, got " + std::to_string(cols.size()));

    auto index = parse_uint(cols[0]);
    if (!index || *index != current.size() + 1)
      throw ParseError(line_no, "INDEX must be " + std::to_string(current.size() + 1) + ", got '" + std::string(cols[0]) + "'");
    if (cols[1].empty() || cols[1].find_first_of(" \t\v\f") != std::string_view::npos)
      throw ParseError(line_no, "FORM must be a non-empty word without whitespace");

    NodeType type = NodeType::None;
    if (cols[4] != "_") {
      auto t = parse_node_type(cols[4]);
      if (!t || *t == NodeType::None) throw ParseError(line_no, "unknown NODE_TYPE '" + std::string(cols[4]) + "'");
      type = *t;
    }
    if (cols[3] != "_" && cols[3] != to_string(type))
      throw ParseError(line_no, "ARC_LABEL '" + std::string(cols[3]) + "' disagrees with NODE_TYPE");

    Position parent = kRoot;
    if (cols[2] == "_") {
      if (type != NodeType::None) throw ParseError(line_no, "HEAD is required for typed rows");
    } else {
      auto head = parse_uint(cols[2]);
      if (!head) throw ParseError(line_no, "HEAD must be a non-negative integer or '_'");
      parent = *head;
    }
    current.tokens.push_back({*index, std::string(cols[1]), type, parent});
    line_of.push_back(line_no);
  }
  flush();

  // NONE rows carry no parent; normalize after the range check.
  for (auto& s : out)
    for (auto& t : s.tokens)
      if (t.node_type == NodeType::None) t.parent = kRoot;
  return out;
}

std::string write_conll(const std::vector<TaggedSentence>& sentences) {
  std::string out;
  for (const auto& s : sentences) {
    if (s.empty()) continue;
    for (const auto& t : s.tokens) {
      out += std::to_string(t.index);
      out += '\t';
      out += t.form;
      out += '\t';
      if (t.node_type == NodeType::None) {
        out += "_\t_\t_\n";
        continue;
      }
      out += std::to_string(t.parent);
      out += '\t';
      out += (t.node_type == NodeType::Attr || t.node_type == NodeType::Same) ? to_string(t.node_type)
                                                                              : std::string_view("_");
      out += '\t';
      out += to_string(t.node_type);
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

}  // namespace sgforge
