"""In-memory memoisation of shot records with LRU eviction."""

import threading
from typing import Any, Dict, Hashable, List, Optional, Tuple

from cachetools import LRUCache

from src.utils.env_loader import ENV_PREFIX, get_env_flag, get_env_int
from src.utils.logger import get_logger

logger = get_logger(__name__)

CACHE_TYPES = ("minus_shots", "plus_shots")


class CacheManager:
    """Centralized cache manager for shot records.

    Shots are pure functions of (params, seed, config), so a record can be reused by
    any later request with the same key. Thread-safe operations.
    """

    def __init__(self) -> None:
        """Initialize CacheManager with environment-configured sizes."""
        self._lock = threading.RLock()
        self._enabled = not get_env_flag(f"{ENV_PREFIX}DISABLE_CACHE")
        size = get_env_int(f"{ENV_PREFIX}CACHE_SIZE", 4096)
        self._caches: Dict[str, LRUCache] = {name: LRUCache(maxsize=size) for name in CACHE_TYPES}
        self._hits = 0
        self._misses = 0

    @property
    def enabled(self) -> bool:
        """Whether lookups and stores are active."""
        return self._enabled

    def get(self, cache_type: str, key: Hashable) -> Optional[Any]:
        """Get value from cache.

        Args:
            cache_type (str): Cache type ("minus_shots", "plus_shots").
            key (Hashable): Cache key.

        Returns:
            Optional[Any]: Cached value or None if not found.
        """
        if not self._enabled:
            return None
        with self._lock:
            cache = self._caches.get(cache_type)
            if cache is None:
                logger.warning(f"Unknown cache type: {cache_type}")
                return None
            value = cache.get(key)
            if value is None:
                self._misses += 1
            else:
                self._hits += 1
            return value

    def set(self, cache_type: str, key: Hashable, value: Any) -> None:
        """Set value in cache.

        Args:
            cache_type (str): Cache type ("minus_shots", "plus_shots").
            key (Hashable): Cache key.
            value (Any): Value to cache.
        """
        if not self._enabled:
            return
        with self._lock:
            cache = self._caches.get(cache_type)
            if cache is None:
                logger.warning(f"Unknown cache type: {cache_type}")
                return
            cache[key] = value

    def clear(self, cache_type: Optional[str] = None) -> None:
        """Clear cache entries.

        Args:
            cache_type (Optional[str]): Cache type to clear. If None, clears all caches.
        """
        with self._lock:
            targets = [self._caches[cache_type]] if cache_type in self._caches else []
            if cache_type is None:
                targets = list(self._caches.values())
            for cache in targets:
                cache.clear()
            if cache_type is None:
                self._hits = self._misses = 0

    def export_entries(self) -> Dict[str, List[Tuple[Hashable, Any]]]:
        """Snapshot every cached (key, value) pair by cache type.

        Returns:
            Dict[str, List[Tuple[Hashable, Any]]]: Entries per cache type.
        """
        with self._lock:
            return {name: list(cache.items()) for name, cache in self._caches.items()}

    def import_entries(self, entries: Dict[str, List[Tuple[Hashable, Any]]]) -> None:
        """Store entries produced elsewhere, such as in a worker process.

        Args:
            entries (Dict[str, List[Tuple[Hashable, Any]]]): Entries per cache type.
        """
        for cache_type, pairs in entries.items():
            for key, value in pairs:
                self.set(cache_type, key, value)

    def get_stats(self) -> Dict[str, Any]:
        """Get cache statistics.

        Returns:
            Dict[str, Any]: Sizes per cache type plus hit and miss counts.
        """
        with self._lock:
            stats: Dict[str, Any] = {
                name: {"size": len(cache), "maxsize": cache.maxsize}
                for name, cache in self._caches.items()
            }
            stats["hits"] = self._hits
            stats["misses"] = self._misses
            return stats


_global_cache_manager: Optional[CacheManager] = None
_manager_lock = threading.Lock()


def get_cache_manager() -> CacheManager:
    """Get global cache manager instance (singleton).

    Returns:
        CacheManager: Global cache manager instance.
    """
    global _global_cache_manager
    if _global_cache_manager is None:
        with _manager_lock:
            if _global_cache_manager is None:
                _global_cache_manager = CacheManager()
    return _global_cache_manager
