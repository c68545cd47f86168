#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace dictate {

// Half-open [start, end) over Unicode scalar offsets.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start; }
  bool empty() const { return start == end; }
  bool contains(const Span& other) const { return start <= other.start && other.end <= end; }

  friend bool operator==(const Span&, const Span&) = default;
  friend auto operator<=>(const Span&, const Span&) = default;
};

struct Selection {
  std::size_t anchor = 0;
  std::size_t focus = 0;

  std::size_t lo() const { return std::min(anchor, focus); }
  std::size_t hi() const { return std::max(anchor, focus); }
  bool is_cursor() const { return anchor == focus; }
  Span span() const { return {lo(), hi()}; }

  friend bool operator==(const Selection&, const Selection&) = default;
};

// Document content plus selection; the unit every stage reads and writes.
struct DocumentState {
  std::u32string content;
  Selection selection;

  DocumentState() = default;
  DocumentState(std::u32string c, std::size_t anchor, std::size_t focus)
      : content(std::move(c)), selection{anchor, focus} {}

  static DocumentState from_utf8(std::string_view content, std::size_t anchor, std::size_t focus);
  // Cursor at the end of content.
  static DocumentState at_end(std::u32string content);

  std::string content_utf8() const;
  // Throws BoundsError when the selection falls outside the content.
  void validate() const;

  friend bool operator==(const DocumentState&, const DocumentState&) = default;
};

struct Retain {
  std::size_t count = 0;
  friend bool operator==(const Retain&, const Retain&) = default;
};
struct Delete {
  std::size_t count = 0;
  friend bool operator==(const Delete&, const Delete&) = default;
};
struct Insert {
  std::u32string text;
  friend bool operator==(const Insert&, const Insert&) = default;
};

using EditOp = std::variant<Retain, Delete, Insert>;
using EditScript = std::vector<EditOp>;

// Replaces the selection with `seg_text` verbatim; cursor lands after it.
DocumentState insert_dictation(const DocumentState& d, std::u32string_view seg_text);

// Replaces `span` with `replacement`; the new selection covers the
// replacement. Throws BoundsError for spans outside the content.
DocumentState apply_span_edit(const DocumentState& d, Span span, std::u32string_view replacement);

// Character-level LCS diff. Canonical form: adjacent ops of one kind are
// merged and, between two retains, deletes come before inserts.
EditScript diff(std::u32string_view before, std::u32string_view after);
EditScript diff(const DocumentState& before, const DocumentState& after);

// Throws BoundsError when the script does not fit `source`.
std::u32string apply_edit_script(std::u32string_view source, const EditScript& script);

// Content equality; selection is ignored.
bool state_match(const DocumentState& predicted, const DocumentState& gold);

}  // namespace dictate
