#include "poasim/ledger.hpp"

#include "json.hpp"

namespace poasim::ledger {

void serialize(const Transaction& tx, ByteWriter& out) {
  out.u64(tx.tx_id);
  out.u32(tx.origin_head);
  out.u64(tx.size_bytes);
  out.f64(tx.created_at);
  out.digest(tx.payload_digest);
}

Transaction parse_transaction(ByteReader& in) {
  Transaction tx;
  tx.tx_id = in.u64();
  tx.origin_head = in.u32();
  tx.size_bytes = in.u64();
  tx.created_at = in.f64();
  tx.payload_digest = in.digest();
  return tx;
}

Digest leaf_hash(const Transaction& tx) {
  ByteWriter w;
  serialize(tx, w);
  return sha256(w.data());
}

std::vector<std::uint8_t> serialize_transactions(std::span<const Transaction> txs) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(txs.size()));
  for (const auto& tx : txs) serialize(tx, w);
  return w.take();
}

std::vector<Transaction> parse_transactions(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const auto count = r.u32();
  std::vector<Transaction> txs;
  for (std::uint32_t i = 0; i < count; ++i) txs.push_back(parse_transaction(r));
  if (!r.done()) throw std::invalid_argument("trailing bytes after transaction list");
  return txs;
}

Digest merkle_root(std::span<const Digest> leaf_hashes) {
  if (leaf_hashes.empty()) return sha256(std::string_view{});
  std::vector<Digest> layer(leaf_hashes.begin(), leaf_hashes.end());
  while (layer.size() > 1) {
    if (layer.size() % 2 == 1) layer.push_back(layer.back());
    std::vector<Digest> next;
    next.reserve(layer.size() / 2);
    for (std::size_t i = 0; i < layer.size(); i += 2) next.push_back(sha256_pair(layer[i], layer[i + 1]));
    layer = std::move(next);
  }
  return layer.front();
}

Digest merkle_root_of(std::span<const Transaction> txs) {
  std::vector<Digest> leaves;
  leaves.reserve(txs.size());
  for (const auto& tx : txs) leaves.push_back(leaf_hash(tx));
  return merkle_root(leaves);
}

Digest hash_block(const BlockHeader& header) {
  ByteWriter w;
  w.u64(header.index);
  w.f64(header.timestamp);
  w.digest(header.merkle_root);
  w.digest(header.prev_hash);
  w.u32(header.proposer);
  return sha256(w.data());
}

std::uint64_t Block::payload_bytes() const {
  std::uint64_t total = 0;
  for (const auto& tx : transactions) total += tx.size_bytes;
  return total;
}

Block make_block(const Block& prev, double timestamp, ValidatorId proposer, std::vector<Transaction> txs) {
  Block b;
  b.index = prev.index + 1;
  b.timestamp = timestamp;
  b.merkle_root = merkle_root_of(txs);
  b.transactions = std::move(txs);
  b.prev_hash = prev.block_hash;
  b.proposer = proposer;
  b.block_hash = hash_block(b.header());
  return b;
}

Block make_genesis() {
  Block g;
  g.index = 0;
  g.timestamp = 0.0;
  g.merkle_root = merkle_root({});
  g.prev_hash = kZeroDigest;
  g.proposer = kGenesisProposer;
  g.block_hash = hash_block(g.header());
  return g;
}

std::string_view to_string(Violation v) {
  switch (v) {
    case Violation::kNone: return "ok";
    case Violation::kIndexMismatch: return "IndexMismatch";
    case Violation::kPrevHashMismatch: return "PrevHashMismatch";
    case Violation::kMerkleMismatch: return "MerkleMismatch";
    case Violation::kBlockHashMismatch: return "BlockHashMismatch";
    case Violation::kTimestampRegression: return "TimestampRegression";
    case Violation::kBadGenesis: return "BadGenesis";
  }
  return "unknown";
}

namespace {

Violation check_self(const Block& b) {
  if (merkle_root_of(b.transactions) != b.merkle_root) return Violation::kMerkleMismatch;
  if (hash_block(b.header()) != b.block_hash) return Violation::kBlockHashMismatch;
  return Violation::kNone;
}

}  // namespace

Violation check_link(const Block& prev, const Block& next) {
  if (next.index != prev.index + 1) return Violation::kIndexMismatch;
  if (next.prev_hash != prev.block_hash) return Violation::kPrevHashMismatch;
  if (next.timestamp < prev.timestamp) return Violation::kTimestampRegression;
  return check_self(next);
}

Chain::Chain() { blocks_.push_back(make_genesis()); }

Violation Chain::append(Block block) {
  const auto v = check_link(blocks_.back(), block);
  if (v == Violation::kNone) blocks_.push_back(std::move(block));
  return v;
}

ValidationReport validate_blocks(std::span<const Block> blocks) {
  if (blocks.empty()) return {Violation::kBadGenesis, 0};
  const auto& g = blocks.front();
  if (g.index != 0 || g.prev_hash != kZeroDigest) return {Violation::kBadGenesis, 0};
  if (auto v = check_self(g); v != Violation::kNone) return {v, 0};
  for (std::size_t i = 1; i < blocks.size(); ++i) {
    if (auto v = check_link(blocks[i - 1], blocks[i]); v != Violation::kNone) return {v, i};
  }
  return {};
}

ValidationReport validate_chain(const Chain& chain) { return validate_blocks(chain.blocks()); }

void export_chain(const Chain& chain, std::ostream& out) {
  for (const auto& b : chain.blocks()) {
    nlohmann::ordered_json rec;
    rec["index"] = b.index;
    rec["timestamp"] = b.timestamp;
    rec["proposer"] = b.proposer;
    rec["prev_hash"] = to_hex(b.prev_hash);
    rec["block_hash"] = to_hex(b.block_hash);
    rec["tx_count"] = b.transactions.size();
    rec["total_bytes"] = b.payload_bytes();
    out << rec.dump() << '\n';
  }
}

}  // namespace poasim::ledger
