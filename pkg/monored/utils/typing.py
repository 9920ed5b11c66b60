"""Some useful type aliases relevant to this project."""
import pathlib
from typing import TYPE_CHECKING, Callable, Sequence

import numpy

if TYPE_CHECKING:
    from monored.history import Candidate
    from monored.oracles import Outcome

ArrayLike = list | tuple | numpy.ndarray
PathLike = str | pathlib.Path

# An oracle maps a candidate to the verdict observed for it. External commands,
# truth tables and synthetic spaces all share this shape.
Oracle = Callable[["Candidate"], "Outcome"]

# Renders a candidate to the bytes handed to an external command.
Renderer = Callable[["Candidate"], bytes]

# All strings are also Sequence[str], so we have to distinguish that we
# mean lists or tuples of strings, or sets of strings, not other strings.
StrSequence = list[str] | tuple[str, ...]
FloatSequence = Sequence[float]
