#include "sxcad/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <sstream>

#include "sxcad/error.hpp"
#include "sxcad/geom.hpp"
#include "sxcad/hash.hpp"

namespace sxcad {
namespace {

constexpr std::size_t kSnippetMax = 120;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  std::string_view body = s;
  if (!body.empty() && body.front() == '-') body.remove_prefix(1);
  if (body.empty() || !(std::isdigit(static_cast<unsigned char>(body.front())) || body.front() == '.')) {
    return std::nullopt;
  }
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

enum class TokenKind { Sol, Cut, Line, Arc, Circle, Extrude };

struct Token {
  TokenKind kind;
  std::vector<std::string_view> args;
  bool canonical_case = true;
};

/// Splits a line into command tokens; nullopt when the line is not made
/// entirely of commands (i.e. it is prose).
std::optional<std::vector<Token>> lex(std::string_view line) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  auto skip_space = [&] {
    while (i < line.size() && (std::isspace(static_cast<unsigned char>(line[i])) || line[i] == ';')) ++i;
  };
  skip_space();
  while (i < line.size()) {
    if (line[i] == '#') break;  // trailing comment
    if (line[i] == '<') {
      const std::size_t close = line.find('>', i);
      if (close == std::string_view::npos) return std::nullopt;
      const std::string_view tag = line.substr(i + 1, close - i - 1);
      Token t;
      if (iequals(tag, "SOL")) {
        t.kind = TokenKind::Sol;
      } else if (iequals(tag, "CUT")) {
        t.kind = TokenKind::Cut;
      } else {
        return std::nullopt;
      }
      t.canonical_case = tag == "SOL" || tag == "CUT";
      tokens.push_back(t);
      i = close + 1;
      skip_space();
      continue;
    }
    const char key = line[i];
    Token t;
    switch (std::toupper(static_cast<unsigned char>(key))) {
      case 'L': t.kind = TokenKind::Line; break;
      case 'A': t.kind = TokenKind::Arc; break;
      case 'R': t.kind = TokenKind::Circle; break;
      case 'E': t.kind = TokenKind::Extrude; break;
      default: return std::nullopt;
    }
    t.canonical_case = std::isupper(static_cast<unsigned char>(key)) != 0;
    ++i;
    while (i < line.size() && line[i] == ' ') ++i;
    if (i >= line.size() || line[i] != ':') return std::nullopt;
    ++i;
    while (i < line.size() && line[i] == ' ') ++i;
    if (i >= line.size() || line[i] != '(') return std::nullopt;
    const std::size_t close = line.find(')', i);
    if (close == std::string_view::npos) return std::nullopt;
    std::string_view inner = line.substr(i + 1, close - i - 1);
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = inner.find(',', start);
      t.args.push_back(trim(inner.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    tokens.push_back(std::move(t));
    i = close + 1;
    skip_space();
  }
  if (tokens.empty()) return std::nullopt;
  return tokens;
}

const char* token_name(TokenKind k) {
  switch (k) {
    case TokenKind::Sol: return "<SOL>";
    case TokenKind::Cut: return "<CUT>";
    case TokenKind::Line: return "L";
    case TokenKind::Arc: return "A";
    case TokenKind::Circle: return "R";
    case TokenKind::Extrude: return "E";
  }
  return "?";
}

class Parser {
 public:
  explicit Parser(std::string_view source) : source_(source) {}

  ParseResult run() {
    std::size_t pos = 0;
    int line_no = 0;
    while (pos <= source_.size()) {
      const std::size_t nl = source_.find('\n', pos);
      std::string_view raw = source_.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      ++line_no;
      handle_line(line_no, raw);
      if (nl == std::string_view::npos) break;
      pos = nl + 1;
    }
    last_line_ = std::max(1, line_no);
    if (block_) error(block_->start_line, "unclosed block: sketch without extrude command", block_->start_snippet);

    ParseResult result;
    const bool has_error = std::any_of(diags_.begin(), diags_.end(),
                                       [](const SourceDiagnostic& d) { return d.severity == Severity::Error; });
    if (!has_error && parts_.empty()) {
      error(last_line_, "no CAD blocks found", "");
    }
    if (std::none_of(diags_.begin(), diags_.end(), [](const SourceDiagnostic& d) { return d.severity == Severity::Error; })) {
      std::vector<Part> parts;
      parts.reserve(parts_.size());
      for (auto& [label, blocks] : parts_) parts.emplace_back(label, std::move(blocks));
      result.program = CadProgram(std::move(parts), sha256_hex(source_));
    }
    result.diagnostics = std::move(diags_);
    return result;
  }

 private:
  struct OpenBlock {
    int start_line = 0;
    std::string start_snippet;
    std::size_t part = 0;
    Loop outer;
    std::vector<Loop> cuts;
    bool in_cut = false;
    bool broken = false;
  };

  static std::string snippet(std::string_view line) {
    line = trim(line);
    return std::string(line.substr(0, kSnippetMax));
  }

  void error(int line, std::string message, std::string snip) {
    diags_.push_back({Severity::Error, line, std::move(message), std::move(snip)});
    if (block_) block_->broken = true;
  }
  void warning(int line, std::string message, std::string snip) {
    diags_.push_back({Severity::Warning, line, std::move(message), std::move(snip)});
  }

  std::size_t part_for(const std::string& label) {
    const std::string key = normalize_label(label);
    const auto it = part_index_.find(key);
    if (it != part_index_.end()) return it->second;
    parts_.emplace_back(key, std::vector<Block>{});
    part_index_[key] = parts_.size() - 1;
    return parts_.size() - 1;
  }

  void handle_line(int line_no, std::string_view raw) {
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    const std::string_view line = trim(raw);
    if (line.empty()) return;
    if (line.front() == '#') {
      std::string_view text = line;
      while (!text.empty() && text.front() == '#') text.remove_prefix(1);
      text = trim(text);
      if (!block_ && !pending_label_ && !normalize_label(text).empty()) pending_label_ = std::string(text);
      return;
    }
    auto tokens = lex(line);
    if (!tokens) {
      if (block_) {
        error(line_no, "unrecognized line inside a command block", snippet(line));
      } else {
        warning(line_no, "skipped non-CAD line", snippet(line));
      }
      return;
    }
    for (const Token& t : *tokens) {
      if (!t.canonical_case) warning(line_no, std::string("non-canonical keyword case for ") + token_name(t.kind), snippet(line));
      handle_token(line_no, line, t);
    }
  }

  std::optional<std::vector<double>> numbers(int line_no, std::string_view line, const Token& t, std::size_t arity,
                                             std::size_t count) {
    if (t.args.size() != arity) {
      error(line_no,
            std::string("malformed ") + token_name(t.kind) + " tuple: expected " + std::to_string(arity) +
                " values, got " + std::to_string(t.args.size()),
            snippet(line));
      return std::nullopt;
    }
    std::vector<double> out;
    for (std::size_t k = 0; k < count; ++k) {
      const auto v = parse_number(t.args[k]);
      if (!v) {
        error(line_no, std::string("malformed number '") + std::string(t.args[k]) + "' in " + token_name(t.kind) + " tuple",
              snippet(line));
        return std::nullopt;
      }
      out.push_back(*v);
    }
    return out;
  }

  void handle_token(int line_no, std::string_view line, const Token& t) {
    switch (t.kind) {
      case TokenKind::Sol: {
        if (block_) {
          error(line_no, "unclosed block: <SOL> before the previous block's extrude command", snippet(line));
          block_.reset();
        }
        OpenBlock b;
        b.start_line = line_no;
        b.start_snippet = snippet(line);
        if (pending_label_) {
          b.part = part_for(*pending_label_);
          pending_label_.reset();
        } else if (current_part_) {
          b.part = *current_part_;
        } else {
          b.part = part_for("unlabeled");
        }
        current_part_ = b.part;
        block_ = std::move(b);
        return;
      }
      case TokenKind::Cut: {
        if (!block_ || block_->outer.empty()) {
          error(line_no, "<CUT> before any base sketch command", snippet(line));
          return;
        }
        if (block_->in_cut && block_->cuts.back().empty()) {
          error(line_no, "empty cut loop", snippet(line));
          return;
        }
        block_->cuts.emplace_back();
        block_->in_cut = true;
        return;
      }
      case TokenKind::Line:
      case TokenKind::Arc:
      case TokenKind::Circle: {
        if (!block_) {
          error(line_no, std::string("sketch command ") + token_name(t.kind) + " outside a <SOL> block", snippet(line));
          return;
        }
        std::optional<SketchCommand> cmd;
        try {
          if (t.kind == TokenKind::Line) {
            if (auto v = numbers(line_no, line, t, 2, 2)) cmd = Line({(*v)[0], (*v)[1]});
          } else if (t.kind == TokenKind::Arc) {
            if (auto v = numbers(line_no, line, t, 4, 4)) {
              const double flag = (*v)[3];
              if (flag != 0.0 && flag != 1.0) throw InvariantError("arc flag must be 0 or 1");
              cmd = Arc({(*v)[0], (*v)[1]}, (*v)[2], static_cast<int>(flag));
            }
          } else {
            if (auto v = numbers(line_no, line, t, 3, 3)) cmd = Circle({(*v)[0], (*v)[1]}, (*v)[2]);
          }
        } catch (const InvariantError& e) {
          error(line_no, e.what(), snippet(line));
        }
        if (cmd) (block_->in_cut ? block_->cuts.back() : block_->outer).push_back(*cmd);
        return;
      }
      case TokenKind::Extrude: {
        if (!block_ || block_->outer.empty()) {
          error(line_no, "extrude without sketch", snippet(line));
          block_.reset();
          return;
        }
        if (block_->in_cut && block_->cuts.back().empty()) error(line_no, "empty cut loop", snippet(line));
        const auto v = numbers(line_no, line, t, 9, 7);
        std::optional<BooleanOp> op;
        if (v) {
          op = boolean_op_from_string(t.args[7]);
          if (!op) {
            error(line_no, "unknown boolean type '" + std::string(t.args[7]) + "'", snippet(line));
          } else if (t.args[7] != to_string(*op)) {
            warning(line_no, "non-canonical boolean keyword case", snippet(line));
          }
          if (!iequals(t.args[8], "OneSided")) {
            error(line_no, "unsupported extrusion type '" + std::string(t.args[8]) + "' (only OneSided)", snippet(line));
          }
        }
        if (v && op && !block_->broken) {
          try {
            const auto& a = *v;
            ExtrudeCommand extrude(NormalFrame({a[0], a[1], a[2]}), {a[3], a[4], a[5]}, a[6], *op);
            Profile profile(std::move(block_->outer), std::move(block_->cuts));
            parts_[block_->part].second.push_back(Block{std::move(profile), std::move(extrude)});
          } catch (const InvariantError& e) {
            error(line_no, e.what(), snippet(line));
          }
        }
        block_.reset();
        return;
      }
    }
  }

  std::string_view source_;
  std::vector<SourceDiagnostic> diags_;
  std::vector<std::pair<std::string, std::vector<Block>>> parts_;
  std::map<std::string, std::size_t> part_index_;
  std::optional<std::size_t> current_part_;
  std::optional<std::string> pending_label_;
  std::optional<OpenBlock> block_;
  int last_line_ = 1;
};

void print_loop(std::ostringstream& os, const Loop& loop) {
  for (const auto& cmd : loop) {
    if (const auto* line = std::get_if<Line>(&cmd)) {
      os << "L: (" << format_number(line->end().x) << ',' << format_number(line->end().y) << ")\n";
    } else if (const auto* arc = std::get_if<Arc>(&cmd)) {
      os << "A: (" << format_number(arc->end().x) << ',' << format_number(arc->end().y) << ','
         << format_number(arc->sweep_deg()) << ',' << arc->ccw_flag() << ")\n";
    } else {
      const auto& c = std::get<Circle>(cmd);
      os << "R: (" << format_number(c.center().x) << ',' << format_number(c.center().y) << ','
         << format_number(c.radius()) << ")\n";
    }
  }
}

}  // namespace

std::vector<SourceDiagnostic> ParseResult::errors() const {
  std::vector<SourceDiagnostic> out;
  std::copy_if(diagnostics.begin(), diagnostics.end(), std::back_inserter(out),
               [](const SourceDiagnostic& d) { return d.severity == Severity::Error; });
  return out;
}

ParseResult parse(std::string_view source) { return Parser(source).run(); }

std::string format_number(double value) {
  if (value == 0.0) return "0";
  char buf[400];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, ptr);
}

std::string print(const CadProgram& program) {
  std::ostringstream os;
  bool first = true;
  for (const Part& part : program.parts()) {
    if (!first) os << '\n';
    first = false;
    os << "# " << part.label() << '\n';
    for (const Block& block : part.blocks()) {
      os << "<SOL>\n";
      print_loop(os, block.profile.outer());
      for (const Loop& cut : block.profile.cuts()) {
        os << "<CUT>\n";
        print_loop(os, cut);
      }
      const ExtrudeCommand& e = block.extrude;
      const Vec3 n = frame_normal(e.frame());
      os << "E: (" << format_number(n.x) << ',' << format_number(n.y) << ',' << format_number(n.z) << ','
         << format_number(e.origin().x) << ',' << format_number(e.origin().y) << ',' << format_number(e.origin().z)
         << ',' << format_number(e.extent()) << ',' << to_string(e.boolean_op()) << ",OneSided)\n";
    }
  }
  return os.str();
}

}  // namespace sxcad
