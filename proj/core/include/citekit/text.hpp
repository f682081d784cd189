#pragma once

#include <string>
#include <string_view>
#include <vector>

// Byte-level text helpers shared by the parser, retriever, judges and metrics.
// Bytes >= 0x80 count as word characters so UTF-8 sequences stay inside tokens.
namespace citekit::text {

bool is_word_byte(unsigned char c) noexcept;
bool is_space_byte(unsigned char c) noexcept;

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s) noexcept;

/// Collapses whitespace runs into single spaces and trims both ends.
std::string normalize_whitespace(std::string_view s);

std::vector<std::string> whitespace_tokens(std::string_view s);

/// Lowercased maximal runs of word bytes.
std::vector<std::string> word_tokens(std::string_view s);

/// word_tokens minus the fixed stoplist.
std::vector<std::string> content_tokens(std::string_view s);

bool is_stopword(std::string_view token) noexcept;
const std::vector<std::string_view>& stopwords();

/// Lowercase, ASCII punctuation removed, whitespace collapsed.
std::string normalize_for_match(std::string_view s);

/// 64-bit FNV-1a rendered as 16 lowercase hex digits.
std::string digest(std::string_view s);

/// |a ∩ b| as multisets.
std::size_t multiset_overlap(const std::vector<std::string>& a, const std::vector<std::string>& b);

}  // namespace citekit::text
