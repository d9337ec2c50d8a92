"""Count ledger produced by the Monte Carlo engine."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class CountRecord:
    """Click tallies for one scenario run.

    ``singles_*[j]`` counts gates with a click in slot j; ``coincidences[j, k]``
    gates with a signal click in slot j and an idler click in slot k.
    ``accidentals[j, k]`` counts the same pattern across distinct gates of one
    shard, i.e. against every shifted gate; ``accidental_trials`` is the number
    of gate pairs compared, so ``accidentals / accidental_trials`` estimates the
    per-gate accidental probability.
    """

    gates: int
    singles_s: np.ndarray
    singles_i: np.ndarray
    coincidences: np.ndarray
    accidentals: np.ndarray
    accidental_trials: int
    config_hash: str = ""
    meta: dict = field(default_factory=dict)

    @classmethod
    def empty(cls, n_slots: int, config_hash: str = "") -> "CountRecord":
        z1 = np.zeros(n_slots, dtype=np.int64)
        z2 = np.zeros((n_slots, n_slots), dtype=np.int64)
        return cls(0, z1, z1.copy(), z2, z2.copy(), 0, config_hash)

    @property
    def n_slots(self) -> int:
        return len(self.singles_s)

    def merge(self, other: "CountRecord") -> "CountRecord":
        if other.n_slots != self.n_slots:
            raise ValueError("cannot merge records with different slot counts")
        if self.config_hash and other.config_hash and self.config_hash != other.config_hash:
            raise ValueError("cannot merge records from different configurations")
        return CountRecord(
            self.gates + other.gates,
            self.singles_s + other.singles_s,
            self.singles_i + other.singles_i,
            self.coincidences + other.coincidences,
            self.accidentals + other.accidentals,
            self.accidental_trials + other.accidental_trials,
            self.config_hash or other.config_hash,
            {**other.meta, **self.meta},
        )

    __add__ = merge

    def to_dict(self) -> dict:
        return {
            "gates": int(self.gates),
            "singles_s": self.singles_s.tolist(),
            "singles_i": self.singles_i.tolist(),
            "coincidences": self.coincidences.tolist(),
            "accidentals": self.accidentals.tolist(),
            "accidental_trials": int(self.accidental_trials),
            "config_hash": self.config_hash,
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CountRecord":
        return cls(
            int(d["gates"]),
            np.asarray(d["singles_s"], dtype=np.int64),
            np.asarray(d["singles_i"], dtype=np.int64),
            np.asarray(d["coincidences"], dtype=np.int64),
            np.asarray(d["accidentals"], dtype=np.int64),
            int(d["accidental_trials"]),
            d.get("config_hash", ""),
            dict(d.get("meta", {})),
        )

    def __eq__(self, other):
        if not isinstance(other, CountRecord):
            return NotImplemented
        return (
            self.gates == other.gates
            and self.accidental_trials == other.accidental_trials
            and self.config_hash == other.config_hash
            and all(
                np.array_equal(getattr(self, f), getattr(other, f))
                for f in ("singles_s", "singles_i", "coincidences", "accidentals")
            )
        )
