#include "resmgm/view.hpp"

namespace resmgm {

std::string Cell::to_string() const {
  switch (kind_) {
    case Kind::kFree:
      return "FREE";
    case Kind::kUnknown:
      return "UNKNOWN";
    case Kind::kOwner:
      return "a" + std::to_string(agent_);
  }
  return "?";
}

std::size_t LocalView::count_owned(AgentId agent) const {
  std::size_t n = 0;
  for (Cell c : cells_) n += c.owned_by(agent) ? 1 : 0;
  return n;
}

ResourceSet LocalView::owned_by(AgentId agent) const {
  ResourceSet out;
  for (ResourceId r = 0; r < cells_.size(); ++r)
    if (cells_[r].owned_by(agent)) out.insert(r);
  return out;
}

std::string LocalView::to_string() const {
  std::string out = "[";
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    if (i) out += ' ';
    out += cells_[i].to_string();
  }
  return out + "]";
}

LocalView view_from_claims(std::size_t resources, AgentId agent,
                           const ResourceSet& claimed) {
  LocalView view(resources);
  for (ResourceId r : claimed) view[r] = Cell::owner(agent);
  return view;
}

}  // namespace resmgm
