"""
Regeneration policy for rejection-sampling loops.
"""

import logging
from typing import Any, Callable, Dict, List, Optional, Tuple, TypeVar

from seisforge.errors.exceptions import RegenerationError

# Logger
logger = logging.getLogger("seisforge.errors.retry")

T = TypeVar("T")

# A check returns None when the candidate is acceptable, else a rejection reason
CandidateCheck = Callable[[T], Optional[str]]


class RegenerationState:
    """
    State tracking for a rejection-sampling loop.

    This keeps the ledger of rejected candidates so a failure can be
    diagnosed after the fact.
    """

    def __init__(self, label: str):
        self.label = label
        self.attempts: List[Dict[str, Any]] = []

    @property
    def attempt_count(self) -> int:
        """Get the number of rejected candidates so far."""
        return len(self.attempts)

    @property
    def last_reason(self) -> Optional[str]:
        """Get the rejection reason of the most recent candidate."""
        if not self.attempts:
            return None
        return self.attempts[-1].get('reason')

    def reason_counts(self) -> Dict[str, int]:
        """Count rejections by reason."""
        counts: Dict[str, int] = {}
        for attempt in self.attempts:
            reason = attempt['reason']
            counts[reason] = counts.get(reason, 0) + 1
        return counts


class RegenerationPolicy:
    """
    Policy for how many candidates a rejection-sampling loop may draw.

    Args:
        max_attempts: Total candidates allowed before giving up
        warn_after: Emit a warning once this many candidates were rejected
    """

    def __init__(self, max_attempts: int = 1000, warn_after: int = 100):
        if max_attempts < 1:
            raise ValueError("max_attempts must be at least 1")
        self.max_attempts = max_attempts
        self.warn_after = warn_after

    def should_regenerate(self, state: RegenerationState) -> bool:
        """
        Determine if another candidate may be drawn.

        Args:
            state: Current loop state

        Returns:
            True if the loop may continue
        """
        if state.attempt_count == self.warn_after:
            logger.warning(
                f"{state.label}: {state.attempt_count} candidates rejected so far "
                f"({state.reason_counts()})"
            )
        return state.attempt_count < self.max_attempts


class RegenerationHandler:
    """
    Runs a draw/check loop under a regeneration policy.

    Args:
        policy: Policy bounding the number of attempts
    """

    def __init__(self, policy: Optional[RegenerationPolicy] = None):
        self._policy = policy or RegenerationPolicy()

    def execute(
        self,
        label: str,
        draw: Callable[[int], T],
        check: CandidateCheck,
    ) -> Tuple[T, RegenerationState]:
        """
        Draw candidates until one passes the check.

        Args:
            label: Name used in log messages and errors
            draw: Function producing a candidate from the attempt index
            check: Function returning None for acceptable candidates,
                otherwise a short rejection reason

        Returns:
            Tuple of (accepted candidate, loop state)

        Raises:
            RegenerationError: If the policy's attempt budget is exhausted
        """
        state = RegenerationState(label)
        while True:
            candidate = draw(state.attempt_count)
            reason = check(candidate)
            if reason is None:
                if state.attempt_count:
                    logger.debug(
                        f"{label}: accepted after {state.attempt_count} rejections"
                    )
                return candidate, state

            state.attempts.append({'attempt': state.attempt_count, 'reason': reason})
            if not self._policy.should_regenerate(state):
                raise RegenerationError(
                    f"{label}: no acceptable candidate after "
                    f"{state.attempt_count} attempts ({state.reason_counts()})",
                    attempts=state.attempts,
                )
