#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "poasim/hash.hpp"

namespace poasim::ledger {

using TxId = std::uint64_t;
using HeadId = std::uint32_t;
using ValidatorId = std::uint32_t;

inline constexpr ValidatorId kGenesisProposer = 0xffffffffu;

struct Transaction {
  TxId tx_id = 0;
  HeadId origin_head = 0;
  std::uint64_t size_bytes = 0;
  double created_at = 0.0;
  Digest payload_digest{};

  friend bool operator==(const Transaction&, const Transaction&) = default;
};

/// Canonical byte form of a transaction; the Merkle leaf is its SHA-256.
void serialize(const Transaction& tx, ByteWriter& out);
Transaction parse_transaction(ByteReader& in);
Digest leaf_hash(const Transaction& tx);

std::vector<std::uint8_t> serialize_transactions(std::span<const Transaction> txs);
/// Throws std::out_of_range / std::invalid_argument on malformed input.
std::vector<Transaction> parse_transactions(std::span<const std::uint8_t> bytes);

/// Binary Merkle root. An odd layer duplicates its last node, a single leaf
/// is its own root and an empty list hashes to SHA-256("").
Digest merkle_root(std::span<const Digest> leaf_hashes);
Digest merkle_root_of(std::span<const Transaction> txs);

struct BlockHeader {
  std::uint64_t index = 0;
  double timestamp = 0.0;
  Digest merkle_root{};
  Digest prev_hash{};
  ValidatorId proposer = 0;
};

Digest hash_block(const BlockHeader& header);

struct Block {
  std::uint64_t index = 0;
  double timestamp = 0.0;
  Digest merkle_root{};
  std::vector<Transaction> transactions;
  Digest prev_hash{};
  Digest block_hash{};
  ValidatorId proposer = 0;

  BlockHeader header() const { return {index, timestamp, merkle_root, prev_hash, proposer}; }
  std::uint64_t payload_bytes() const;
};

/// Builds a sealed block (Merkle root and hash filled in) on top of `prev`.
Block make_block(const Block& prev, double timestamp, ValidatorId proposer, std::vector<Transaction> txs);
Block make_genesis();

enum class Violation {
  kNone,
  kIndexMismatch,
  kPrevHashMismatch,
  kMerkleMismatch,
  kBlockHashMismatch,
  kTimestampRegression,
  kBadGenesis,
};

std::string_view to_string(Violation v);

/// Checks a candidate block against the block it would follow.
Violation check_link(const Block& prev, const Block& next);

struct ValidationReport {
  Violation violation = Violation::kNone;
  std::optional<std::size_t> index;  // first offending block

  bool ok() const { return violation == Violation::kNone; }
};

class Chain {
 public:
  Chain();  // genesis only

  [[nodiscard]] Violation append(Block block);

  const Block& tip() const { return blocks_.back(); }
  const std::vector<Block>& blocks() const { return blocks_; }
  std::size_t size() const { return blocks_.size(); }

  /// Test hook: lets corruption tests reach past the append-time checks.
  std::vector<Block>& mutable_blocks() { return blocks_; }

 private:
  std::vector<Block> blocks_;
};

ValidationReport validate_chain(const Chain& chain);
ValidationReport validate_blocks(std::span<const Block> blocks);

/// One JSON object per block: index, timestamp, proposer, prev_hash,
/// block_hash, tx_count, total_bytes.
void export_chain(const Chain& chain, std::ostream& out);

}  // namespace poasim::ledger
