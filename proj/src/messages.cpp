#include "resmgm/messages.hpp"

#include <bit>
#include <cstring>
#include <stdexcept>

namespace resmgm {

namespace {

constexpr std::uint8_t kCellUnknown = 0xFE;
constexpr std::uint8_t kCellFree = 0xFF;

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(static_cast<std::byte>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

  void view(const LocalView& v) {
    u32(static_cast<std::uint32_t>(v.size()));
    for (Cell c : v) {
      if (c.is_free()) {
        u8(kCellFree);
      } else if (c.is_unknown()) {
        u8(kCellUnknown);
      } else {
        if (c.agent() > kMaxAgentId)
          throw std::invalid_argument("agent id does not fit the cell encoding");
        u8(static_cast<std::uint8_t>(c.agent()));
      }
    }
  }

  std::vector<std::byte> take() { return std::move(out_); }

 private:
  std::vector<std::byte> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::byte> in) : in_(in) {}

  std::uint8_t u8() {
    if (pos_ >= in_.size()) throw std::invalid_argument("truncated message");
    return static_cast<std::uint8_t>(in_[pos_++]);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
    return v;
  }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64() { return std::bit_cast<double>(u64()); }

  LocalView view() {
    const std::uint32_t n = u32();
    if (n > in_.size() - pos_) throw std::invalid_argument("view longer than message");
    std::vector<Cell> cells;
    cells.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      const std::uint8_t b = u8();
      if (b == kCellFree)
        cells.push_back(Cell::free());
      else if (b == kCellUnknown)
        cells.push_back(Cell::unknown());
      else
        cells.push_back(Cell::owner(b));
    }
    return LocalView(std::move(cells));
  }

  bool done() const { return pos_ == in_.size(); }

 private:
  std::span<const std::byte> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::byte> encode(const Message& message) {
  Writer w;
  if (const auto* ok = std::get_if<OkMessage>(&message)) {
    w.u8(static_cast<std::uint8_t>(MessageKind::kOk));
    w.u32(ok->sender);
    w.u32(ok->change_round);
    w.view(ok->view);
    w.u32(static_cast<std::uint32_t>(ok->loss_map.size()));
    for (const auto& [r, c] : ok->loss_map) {
      w.u32(r);
      w.f64(c.value());
    }
    w.u32(static_cast<std::uint32_t>(ok->intrusion_map.size()));
    for (const auto& [t, c] : ok->intrusion_map) {
      w.u32(t);
      w.f64(c.value());
    }
  } else {
    const auto& im = std::get<ImproveMessage>(message);
    w.u8(static_cast<std::uint8_t>(MessageKind::kImprove));
    w.u32(im.sender);
    w.u32(im.termination_counter);
    w.i64(im.improvement.conflicts);
    w.i64(im.improvement.violations);
    w.f64(im.improvement.cost);
    w.f64(im.current_cost.value());
    w.view(im.proposed_view);
  }
  return w.take();
}

Message decode(std::span<const std::byte> bytes) {
  Reader r(bytes);
  const std::uint8_t kind = r.u8();
  Message out;
  if (kind == static_cast<std::uint8_t>(MessageKind::kOk)) {
    OkMessage ok;
    ok.sender = r.u32();
    ok.change_round = r.u32();
    ok.view = r.view();
    for (std::uint32_t n = r.u32(); n > 0; --n) {
      const ResourceId res = r.u32();
      ok.loss_map[res] = Cost(r.f64());
    }
    for (std::uint32_t n = r.u32(); n > 0; --n) {
      const TileId tile = r.u32();
      ok.intrusion_map[tile] = Cost(r.f64());
    }
    out = std::move(ok);
  } else if (kind == static_cast<std::uint8_t>(MessageKind::kImprove)) {
    ImproveMessage im;
    im.sender = r.u32();
    im.termination_counter = r.u32();
    im.improvement.conflicts = r.i64();
    im.improvement.violations = r.i64();
    im.improvement.cost = r.f64();
    im.current_cost = Cost(r.f64());
    im.proposed_view = r.view();
    out = std::move(im);
  } else {
    throw std::invalid_argument("unknown message kind");
  }
  if (!r.done()) throw std::invalid_argument("trailing bytes after message");
  return out;
}

std::size_t encoded_size(const Message& message) {
  if (const auto* ok = std::get_if<OkMessage>(&message))
    return 1 + 4 + 4 + 4 + ok->view.size() + 4 + 12 * ok->loss_map.size() + 4 +
           12 * ok->intrusion_map.size();
  const auto& im = std::get<ImproveMessage>(message);
  return 1 + 4 + 4 + 8 + 8 + 8 + 8 + 4 + im.proposed_view.size();
}

}  // namespace resmgm
