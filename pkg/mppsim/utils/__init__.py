# Utility functions
from mppsim.utils.prefix_hash import PrefixHash, default_hasher, hash_init, hash_update
from mppsim.utils.seeding import derive_seed, rng_for

__all__ = ["PrefixHash", "default_hasher", "hash_init", "hash_update", "derive_seed", "rng_for"]
