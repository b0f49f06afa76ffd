"""
Leave-one-session-out fold splitting.
"""

from dataclasses import dataclass
from typing import List

from ..core.exceptions import DatasetError
from ..logger import get_logger
from .manifest import DatasetManifest, ManifestRecord

logger = get_logger(__name__)

SESSIONS = (1, 2, 3, 4, 5)


@dataclass
class Fold:
    """Fold testing on one held-out session."""

    session: int
    train: List[ManifestRecord]
    test: List[ManifestRecord]


def split_folds(manifest: DatasetManifest) -> List[Fold]:
    """Five folds; fold i tests on session i and trains on the rest, in manifest order."""
    missing = [session for session in SESSIONS if session not in manifest.sessions]
    if missing:
        error_string = f"Sessions {missing} have no utterances; five sessions are required."
        logger.error(error_string)
        raise DatasetError(error_string)

    folds = []
    for session in SESSIONS:
        test = [record for record in manifest.records if record.session == session]
        train = [record for record in manifest.records if record.session != session]
        folds.append(Fold(session=session, train=train, test=test))
        logger.debug(f"Fold {session}: {len(train)} train, {len(test)} test.")
    return folds
