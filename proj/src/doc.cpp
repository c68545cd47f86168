#include "dictate/doc.hpp"

#include "dictate/errors.hpp"
#include "dictate/text.hpp"

namespace dictate {

DocumentState DocumentState::from_utf8(std::string_view content, std::size_t anchor, std::size_t focus) {
  DocumentState d(text::from_utf8(content), anchor, focus);
  d.validate();
  return d;
}

DocumentState DocumentState::at_end(std::u32string content) {
  auto n = content.size();
  return DocumentState(std::move(content), n, n);
}

std::string DocumentState::content_utf8() const { return text::to_utf8(content); }

void DocumentState::validate() const {
  if (selection.hi() > content.size()) {
    throw BoundsError("selection (" + std::to_string(selection.anchor) + "," + std::to_string(selection.focus) +
                      ") exceeds content length " + std::to_string(content.size()));
  }
}

DocumentState insert_dictation(const DocumentState& d, std::u32string_view seg_text) {
  d.validate();
  auto sel = d.selection.span();
  DocumentState out;
  out.content.reserve(d.content.size() + seg_text.size());
  out.content.append(d.content, 0, sel.start);
  out.content.append(seg_text);
  out.content.append(d.content, sel.end);
  auto cursor = sel.start + seg_text.size();
  out.selection = {cursor, cursor};
  return out;
}

DocumentState apply_span_edit(const DocumentState& d, Span span, std::u32string_view replacement) {
  if (span.start > span.end || span.end > d.content.size()) {
    throw BoundsError("span [" + std::to_string(span.start) + "," + std::to_string(span.end) +
                      ") outside content of length " + std::to_string(d.content.size()));
  }
  DocumentState out;
  out.content.reserve(d.content.size() - span.length() + replacement.size());
  out.content.append(d.content, 0, span.start);
  out.content.append(replacement);
  out.content.append(d.content, span.end);
  out.selection = {span.start, span.start + replacement.size()};
  return out;
}

namespace {

template <typename Op>
void push_merged(EditScript& script, Op op) {
  if (!script.empty()) {
    if (auto* last = std::get_if<Op>(&script.back())) {
      if constexpr (std::is_same_v<Op, Insert>) {
        last->text += op.text;
      } else {
        last->count += op.count;
      }
      return;
    }
  }
  script.emplace_back(std::move(op));
}

}  // namespace

EditScript diff(std::u32string_view a, std::u32string_view b) {
  // Common prefix/suffix are retained outright; LCS runs on the middle.
  std::size_t prefix = 0;
  while (prefix < a.size() && prefix < b.size() && a[prefix] == b[prefix]) ++prefix;
  std::size_t suffix = 0;
  while (suffix < a.size() - prefix && suffix < b.size() - prefix &&
         a[a.size() - 1 - suffix] == b[b.size() - 1 - suffix]) {
    ++suffix;
  }
  auto am = a.substr(prefix, a.size() - prefix - suffix);
  auto bm = b.substr(prefix, b.size() - prefix - suffix);
  const std::size_t n = am.size();
  const std::size_t m = bm.size();

  // lcs[i][j] = LCS length of am[i..] and bm[j..].
  std::vector<std::size_t> lcs((n + 1) * (m + 1), 0);
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return lcs[i * (m + 1) + j]; };
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      at(i, j) = am[i] == bm[j] ? at(i + 1, j + 1) + 1 : std::max(at(i + 1, j), at(i, j + 1));
    }
  }

  EditScript raw;
  if (prefix > 0) raw.emplace_back(Retain{prefix});
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < n || j < m) {
    if (i < n && j < m && am[i] == bm[j] && at(i, j) == at(i + 1, j + 1) + 1) {
      push_merged(raw, Retain{1});
      ++i;
      ++j;
    } else if (i < n && (j == m || at(i + 1, j) == at(i, j))) {
      push_merged(raw, Delete{1});
      ++i;
    } else {
      push_merged(raw, Insert{std::u32string(1, bm[j])});
      ++j;
    }
  }
  if (suffix > 0) push_merged(raw, Retain{suffix});

  // Canonicalize: within each run between retains, all deletes then all inserts.
  EditScript out;
  std::size_t pending_delete = 0;
  std::u32string pending_insert;
  auto flush = [&] {
    if (pending_delete > 0) out.emplace_back(Delete{pending_delete});
    if (!pending_insert.empty()) out.emplace_back(Insert{pending_insert});
    pending_delete = 0;
    pending_insert.clear();
  };
  for (auto& op : raw) {
    if (auto* r = std::get_if<Retain>(&op)) {
      flush();
      push_merged(out, *r);
    } else if (auto* d = std::get_if<Delete>(&op)) {
      pending_delete += d->count;
    } else {
      pending_insert += std::get<Insert>(op).text;
    }
  }
  flush();
  return out;
}

EditScript diff(const DocumentState& before, const DocumentState& after) { return diff(before.content, after.content); }

std::u32string apply_edit_script(std::u32string_view source, const EditScript& script) {
  std::u32string out;
  std::size_t pos = 0;
  for (const auto& op : script) {
    if (auto* r = std::get_if<Retain>(&op)) {
      if (pos + r->count > source.size()) throw BoundsError("retain past end of source");
      out.append(source.substr(pos, r->count));
      pos += r->count;
    } else if (auto* d = std::get_if<Delete>(&op)) {
      if (pos + d->count > source.size()) throw BoundsError("delete past end of source");
      pos += d->count;
    } else {
      out += std::get<Insert>(op).text;
    }
  }
  if (pos != source.size()) throw BoundsError("edit script leaves " + std::to_string(source.size() - pos) + " characters unconsumed");
  return out;
}

bool state_match(const DocumentState& predicted, const DocumentState& gold) { return predicted.content == gold.content; }

}  // namespace dictate
