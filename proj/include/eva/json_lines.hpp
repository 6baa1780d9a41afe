#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace eva {

/// 1-based line of byte offset `offset` within `text`.
std::size_t line_at_offset(std::string_view text, std::size_t offset);

/// 1-based line where the value addressed by the JSON pointer `pointer`
/// starts in the (already valid) JSON `text`. Returns 1 when the pointer is
/// not found.
std::size_t line_of_pointer(std::string_view text, const std::string &pointer);

} // namespace eva
