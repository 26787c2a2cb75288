#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace difuzz::engine {

inline constexpr std::size_t kMaxInputLen = 4096;

using Rng = std::mt19937_64;
using Input = std::vector<std::uint8_t>;

namespace detail {

inline std::uint64_t below(Rng& rng, std::uint64_t n) { return n ? rng() % n : 0; }

inline const std::int64_t kInteresting1[] = {0, 1, 127, -128, -1};  // -128=0x80, -1=0xFF
inline const std::int64_t kInteresting2[] = {0, 1, 127, 128, 255, 256, 32767, -32768, -1};
inline const std::int64_t kInteresting4[] = {0, 1, 127, 128, 255, 65535, 65536, 2147483647,
                                             -2147483648LL, -1};

inline void clamp_len(Input& in) {
  if (in.empty()) in.push_back(0);
  if (in.size() > kMaxInputLen) in.resize(kMaxInputLen);
}

}  // namespace detail

// One stacked-havoc step: 1-8 operators drawn uniformly; splice falls back
// to a byte op when the corpus has no other entry to splice with.
inline Input mutate(const Input& input, Rng& rng, const std::vector<Input>& corpus) {
  Input out = input;
  if (out.empty()) out.push_back(0);
  std::uint64_t stack = 1 + detail::below(rng, 8);
  for (std::uint64_t round = 0; round < stack; ++round) {
    switch (detail::below(rng, 8)) {
      case 0: {  // bit flip
        std::size_t pos = detail::below(rng, out.size());
        out[pos] ^= static_cast<std::uint8_t>(1u << detail::below(rng, 8));
        break;
      }
      case 1: {  // byte set
        std::size_t pos = detail::below(rng, out.size());
        out[pos] = static_cast<std::uint8_t>(detail::below(rng, 256));
        break;
      }
      case 2: {  // byte add/sub up to 35
        std::size_t pos = detail::below(rng, out.size());
        std::int64_t delta = static_cast<std::int64_t>(detail::below(rng, 35)) + 1;
        if (detail::below(rng, 2)) delta = -delta;
        out[pos] = static_cast<std::uint8_t>(out[pos] + delta);
        break;
      }
      case 3: {  // interesting value, 1/2/4 bytes little-endian
        std::size_t width = std::size_t{1} << detail::below(rng, 3);
        if (out.size() < width) width = 1;
        std::size_t pos = detail::below(rng, out.size() - width + 1);
        std::int64_t v;
        if (width == 1)
          v = detail::kInteresting1[detail::below(rng, std::size(detail::kInteresting1))];
        else if (width == 2)
          v = detail::kInteresting2[detail::below(rng, std::size(detail::kInteresting2))];
        else
          v = detail::kInteresting4[detail::below(rng, std::size(detail::kInteresting4))];
        for (std::size_t i = 0; i < width; ++i)
          out[pos + i] = static_cast<std::uint8_t>((static_cast<std::uint64_t>(v) >> (8 * i)) &
                                                   0xFF);
        break;
      }
      case 4: {  // block delete
        if (out.size() < 2) break;
        std::size_t len = 1 + detail::below(rng, out.size() / 2);
        std::size_t pos = detail::below(rng, out.size() - len + 1);
        out.erase(out.begin() + static_cast<std::ptrdiff_t>(pos),
                  out.begin() + static_cast<std::ptrdiff_t>(pos + len));
        break;
      }
      case 5: {  // block duplicate
        std::size_t len = 1 + detail::below(rng, out.size());
        std::size_t pos = detail::below(rng, out.size() - len + 1);
        Input chunk(out.begin() + static_cast<std::ptrdiff_t>(pos),
                    out.begin() + static_cast<std::ptrdiff_t>(pos + len));
        std::size_t at = detail::below(rng, out.size() + 1);
        out.insert(out.begin() + static_cast<std::ptrdiff_t>(at), chunk.begin(), chunk.end());
        break;
      }
      case 6: {  // append random byte (grow)
        out.push_back(static_cast<std::uint8_t>(detail::below(rng, 256)));
        break;
      }
      case 7: {  // splice with a random corpus entry
        const Input* other = nullptr;
        if (!corpus.empty()) {
          const Input& cand = corpus[detail::below(rng, corpus.size())];
          if (!cand.empty()) other = &cand;
        }
        if (!other) {  // fall back to byte set
          std::size_t pos = detail::below(rng, out.size());
          out[pos] = static_cast<std::uint8_t>(detail::below(rng, 256));
          break;
        }
        std::size_t keep = detail::below(rng, out.size() + 1);
        std::size_t from = detail::below(rng, other->size());
        Input spliced(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(keep));
        spliced.insert(spliced.end(), other->begin() + static_cast<std::ptrdiff_t>(from),
                       other->end());
        out = std::move(spliced);
        break;
      }
    }
    detail::clamp_len(out);
  }
  return out;
}

}  // namespace difuzz::engine
