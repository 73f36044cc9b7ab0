#pragma once

#include <cstddef>

namespace revlang::assets {

struct Asset {
  const char* name;
  const char* text;
};

extern const Asset kAssets[];
extern const std::size_t kAssetCount;

}  // namespace revlang::assets
