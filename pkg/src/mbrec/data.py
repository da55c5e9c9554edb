"""Multi-behavior interaction store.

Loads tab-separated (user, item, behavior) implicit-feedback events into a
sparse ternary tensor with dense contiguous indices, and derives the
leave-one-out evaluation split used by the ranking harness.

File format: one event per line, ``<user_id>\\t<item_id>\\t<behavior_label>``,
UTF-8, no header. Entries are binary: repeating a line is a no-op. The input
carries no timestamps, so "latest interaction" for the holdout rule means the
last target-behavior record in file order; pre-sort the file by time to get a
temporal split.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import AblationError, ParseError, SchemaError
from .numerics import make_rng

logger = logging.getLogger(__name__)

NUM_EVAL_NEGATIVES = 99


@dataclass(frozen=True)
class BehaviorSchema:
    """Ordered behavior-type labels plus which one is the prediction target."""

    names: tuple[str, ...]
    target_index: int

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if len(names) < 1:
            raise SchemaError("behavior schema needs at least one label")
        if any(not n for n in names):
            raise SchemaError("behavior labels must be nonempty")
        if len(set(names)) != len(names):
            raise SchemaError(f"duplicate behavior labels in {names}")
        if not 0 <= self.target_index < len(names):
            raise SchemaError(
                f"target_index {self.target_index} out of range for {len(names)} behaviors"
            )

    @property
    def num_behaviors(self) -> int:
        return len(self.names)

    @property
    def target_name(self) -> str:
        return self.names[self.target_index]

    def index_of(self, label: str) -> int:
        try:
            return self.names.index(label)
        except ValueError:
            raise SchemaError(f"unknown behavior label {label!r}") from None

    @classmethod
    def from_labels(cls, labels: str | list[str], target: str) -> "BehaviorSchema":
        names = labels.split(",") if isinstance(labels, str) else list(labels)
        if target not in names:
            raise SchemaError(f"target {target!r} not among behaviors {names}")
        return cls(tuple(names), names.index(target))


class InteractionTensor:
    """Sparse store of binary (user, item, behavior) events.

    ``events[i][l]`` is a sorted int64 array of the item indices user ``i``
    interacted with under behavior ``l``. External string ids are preserved
    in ``user_ids`` / ``item_ids`` (dense index -> id) with reverse maps.
    Instances are immutable once built and safe for concurrent reads.
    """

    def __init__(
        self,
        schema: BehaviorSchema,
        events: list[list[np.ndarray]],
        user_ids: list[str],
        item_ids: list[str],
        target_positions: list[dict[int, int]] | None = None,
    ):
        self.schema = schema
        self.events = events
        self.user_ids = list(user_ids)
        self.item_ids = list(item_ids)
        self.user_index = {u: i for i, u in enumerate(self.user_ids)}
        self.item_index = {t: j for j, t in enumerate(self.item_ids)}
        # item -> last file position of its target-behavior record, per user;
        # drives the order-based holdout rule.
        self._target_pos = (
            target_positions
            if target_positions is not None
            else [dict() for _ in range(len(self.user_ids))]
        )
        self._any_cache: dict[int, np.ndarray] = {}

    @property
    def num_users(self) -> int:
        return len(self.user_ids)

    @property
    def num_items(self) -> int:
        return len(self.item_ids)

    @property
    def num_behaviors(self) -> int:
        return self.schema.num_behaviors

    @property
    def num_events(self) -> int:
        return sum(len(arr) for per_user in self.events for arr in per_user)

    def items_for(self, user: int, behavior: int) -> np.ndarray:
        return self.events[user][behavior]

    def target_items(self, user: int) -> np.ndarray:
        return self.events[user][self.schema.target_index]

    def items_any_behavior(self, user: int) -> np.ndarray:
        """Sorted union of the user's item indices across all behaviors."""
        cached = self._any_cache.get(user)
        if cached is None:
            cached = np.unique(np.concatenate(self.events[user])) if self.events[user] else np.empty(0, dtype=np.int64)
            self._any_cache[user] = cached
        return cached

    def last_target_item(self, user: int) -> int | None:
        """Item of the user's last-in-file target-behavior record, if any."""
        pos = self._target_pos[user]
        if not pos:
            return None
        return max(pos, key=pos.get)

    def __eq__(self, other) -> bool:
        # Equality up to record order: order metadata is deliberately excluded.
        if not isinstance(other, InteractionTensor):
            return NotImplemented
        if (
            self.schema != other.schema
            or self.user_ids != other.user_ids
            or self.item_ids != other.item_ids
        ):
            return False
        for mine, theirs in zip(self.events, other.events):
            for a, b in zip(mine, theirs):
                if not np.array_equal(a, b):
                    return False
        return True

    def __repr__(self) -> str:
        return (
            f"InteractionTensor(users={self.num_users}, items={self.num_items}, "
            f"behaviors={self.num_behaviors}, events={self.num_events})"
        )


def build_tensor(
    records: list[tuple[str, str, str]], schema: BehaviorSchema
) -> InteractionTensor:
    """Assemble a tensor from (user_id, item_id, behavior_label) records.

    Dense indices follow first-seen order; duplicate triples collapse
    silently. Record order is retained only as the per-user position of the
    last target-behavior event (the holdout rule's input).
    """
    user_ids: list[str] = []
    item_ids: list[str] = []
    user_index: dict[str, int] = {}
    item_index: dict[str, int] = {}
    num_behaviors = schema.num_behaviors
    per_user_sets: list[list[set[int]]] = []
    target_positions: list[dict[int, int]] = []

    for pos, (user, item, label) in enumerate(records):
        behavior = schema.index_of(label)
        if user not in user_index:
            user_index[user] = len(user_ids)
            user_ids.append(user)
            per_user_sets.append([set() for _ in range(num_behaviors)])
            target_positions.append({})
        if item not in item_index:
            item_index[item] = len(item_ids)
            item_ids.append(item)
        i = user_index[user]
        j = item_index[item]
        per_user_sets[i][behavior].add(j)
        if behavior == schema.target_index:
            target_positions[i][j] = pos

    events = [
        [np.array(sorted(s), dtype=np.int64) for s in per_user]
        for per_user in per_user_sets
    ]
    return InteractionTensor(schema, events, user_ids, item_ids, target_positions)


def load_interactions(path, schema: BehaviorSchema) -> InteractionTensor:
    """Parse a TSV event file into an :class:`InteractionTensor`.

    Raises :class:`ParseError` for malformed lines and :class:`SchemaError`
    for unknown behavior labels, both naming the offending line number.
    """
    records: list[tuple[str, str, str]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 3 or not all(fields):
                raise ParseError(
                    f"{path}:{lineno}: expected 3 tab-separated fields, got {line!r}"
                )
            user, item, label = fields
            if label not in schema.names:
                raise SchemaError(
                    f"{path}:{lineno}: behavior label {label!r} not in schema {list(schema.names)}"
                )
            records.append((user, item, label))
    return build_tensor(records, schema)


def write_interactions(tensor: InteractionTensor, path) -> None:
    """Write the tensor back to TSV (users, then behaviors, items sorted)."""
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(tensor.num_users):
            for l, name in enumerate(tensor.schema.names):
                for j in tensor.events[i][l]:
                    fh.write(f"{tensor.user_ids[i]}\t{tensor.item_ids[int(j)]}\t{name}\n")


@dataclass
class EvalSplit:
    """Leave-one-out evaluation split: one held-out target event per
    evaluable user plus 99 sampled negatives the user never touched."""

    held_out: dict[int, int]
    eval_negatives: dict[int, np.ndarray]
    rng_seed: int
    num_users: int
    num_items: int
    skipped_short: tuple[int, ...] = field(default_factory=tuple)
    skipped_saturated: tuple[int, ...] = field(default_factory=tuple)

    @property
    def users(self) -> list[int]:
        return sorted(self.held_out)

    def __eq__(self, other) -> bool:
        if not isinstance(other, EvalSplit):
            return NotImplemented
        return (
            self.held_out == other.held_out
            and self.rng_seed == other.rng_seed
            and self.num_users == other.num_users
            and self.num_items == other.num_items
            and self.skipped_short == other.skipped_short
            and self.skipped_saturated == other.skipped_saturated
            and set(self.eval_negatives) == set(other.eval_negatives)
            and all(
                np.array_equal(self.eval_negatives[u], other.eval_negatives[u])
                for u in self.eval_negatives
            )
        )


def leave_one_out_split(
    tensor: InteractionTensor, seed: int
) -> tuple[InteractionTensor, EvalSplit]:
    """Hold out each evaluable user's last-in-file target event and draw
    99 negatives per user from items untouched under any behavior.

    Users with fewer than 2 target-behavior events are not evaluable, as are
    users with too few non-interacted items to supply 99 negatives (logged);
    their events all stay in training. Negative draws are seeded; the
    held-out choice is order-based and independent of the seed.
    """
    rng = make_rng(seed)
    held_out: dict[int, int] = {}
    negatives: dict[int, np.ndarray] = {}
    skipped_short: list[int] = []
    skipped_saturated: list[int] = []
    target = tensor.schema.target_index
    all_items = np.arange(tensor.num_items, dtype=np.int64)

    train_events: list[list[np.ndarray]] = []
    train_positions: list[dict[int, int]] = []
    for user in range(tensor.num_users):
        user_events = [arr.copy() for arr in tensor.events[user]]
        positions = dict(tensor._target_pos[user])
        target_items = user_events[target]
        if len(target_items) < 2:
            skipped_short.append(user)
        else:
            candidates = np.setdiff1d(
                all_items, tensor.items_any_behavior(user), assume_unique=True
            )
            if len(candidates) < NUM_EVAL_NEGATIVES:
                logger.warning(
                    "user %s interacted with %d of %d items; cannot draw %d "
                    "negatives, excluded from evaluation",
                    tensor.user_ids[user],
                    tensor.num_items - len(candidates),
                    tensor.num_items,
                    NUM_EVAL_NEGATIVES,
                )
                skipped_saturated.append(user)
            else:
                held = tensor.last_target_item(user)
                held_out[user] = int(held)
                negatives[user] = np.sort(
                    rng.choice(candidates, size=NUM_EVAL_NEGATIVES, replace=False)
                ).astype(np.int64)
                user_events[target] = target_items[target_items != held]
                positions.pop(int(held), None)
        train_events.append(user_events)
        train_positions.append(positions)

    train = InteractionTensor(
        tensor.schema, train_events, tensor.user_ids, tensor.item_ids, train_positions
    )
    split = EvalSplit(
        held_out=held_out,
        eval_negatives=negatives,
        rng_seed=seed,
        num_users=tensor.num_users,
        num_items=tensor.num_items,
        skipped_short=tuple(skipped_short),
        skipped_saturated=tuple(skipped_saturated),
    )
    return train, split


def behavior_subset(tensor: InteractionTensor, keep: set[int]) -> InteractionTensor:
    """Restrict the tensor to a subset of behavior types.

    The target behavior must be kept; user/item indexing is unchanged so a
    subset tensor stays compatible with splits made on the full data.
    """
    keep_sorted = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= tensor.num_behaviors for k in keep_sorted):
        raise AblationError(
            f"behavior indices {keep_sorted} out of range for L={tensor.num_behaviors}"
        )
    if tensor.schema.target_index not in keep_sorted:
        raise AblationError(
            f"target behavior {tensor.schema.target_name!r} must be kept in a "
            f"behavior-subset ablation (kept indices: {keep_sorted})"
        )
    names = tuple(tensor.schema.names[k] for k in keep_sorted)
    schema = BehaviorSchema(names, keep_sorted.index(tensor.schema.target_index))
    events = [
        [per_user[k].copy() for k in keep_sorted] for per_user in tensor.events
    ]
    positions = [dict(p) for p in tensor._target_pos]
    return InteractionTensor(schema, events, tensor.user_ids, tensor.item_ids, positions)
