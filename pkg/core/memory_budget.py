import dataclasses
import logging

from core.errors import ResourceCapError
from core.krylov import GmresOptions

logger = logging.getLogger(__name__)

_BYTES_PER_ENTRY = 8


class MemoryBudget:
    """Caps the Arnoldi basis storage of each GMRES run.

    Full GMRES keeps every basis vector, so a cell of size N may hold at most
    ``share_bytes // (8 N)`` of them. The budget is split evenly across the
    concurrent workers. A limit of 0 MB disables the cap.
    """

    def __init__(self, max_mb: int, jobs: int = 1):
        self._max_bytes = max_mb * 1024 * 1024 if max_mb > 0 else 0
        self._jobs = max(1, jobs)
        self._enabled = self._max_bytes > 0

        if self._enabled:
            logger.info("MemoryBudget: limit=%d MB, %d MB per worker",
                        max_mb, self.share_bytes // (1024 * 1024))
        else:
            logger.info("MemoryBudget: no memory limit configured")

    @property
    def enabled(self) -> bool:
        return self._enabled

    @property
    def max_bytes(self) -> int:
        return self._max_bytes

    @property
    def share_bytes(self) -> int:
        return self._max_bytes // self._jobs

    def max_basis_vectors(self, size: int) -> int | None:
        if not self._enabled:
            return None
        return self.share_bytes // (_BYTES_PER_ENTRY * size)

    def apply(self, opts: GmresOptions, size: int) -> GmresOptions:
        """Options for a system of ``size`` unknowns with the basis cap set.

        A fixed ``maxit`` is checked up front: when its maxit + 1 basis vectors
        do not fit the share, the run is refused before any work is done.
        With ``maxit=None`` the cap is enforced while GMRES runs.
        """
        cap = self.max_basis_vectors(size)
        if cap is None:
            return opts
        if opts.maxit is not None and opts.maxit + 1 > cap:
            needed = _BYTES_PER_ENTRY * size * (opts.maxit + 1)
            raise ResourceCapError(
                f"maxit={opts.maxit} needs about {needed // (1024 * 1024)} MB of basis storage "
                f"for N={size}, the per-worker budget is {self.share_bytes // (1024 * 1024)} MB")
        # a cap below two vectors cannot run a single iteration
        return dataclasses.replace(opts, max_basis=max(cap, 2))
