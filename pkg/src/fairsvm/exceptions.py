"""Exception hierarchy shared by all fairsvm modules."""


class FairSVMError(Exception):
    """Base class for errors raised by fairsvm."""


class InputError(FairSVMError, ValueError):
    """Malformed or inconsistent input (shapes, non-finite values, bad options)."""


class DegenerateGroupError(InputError):
    """A protected group (or a conditioned subset of one) is empty or too small."""


class DegenerateLabelError(InputError):
    """Only one label value is present where both are required."""


class LoadError(InputError):
    """A data or recipe file could not be read into a dataset."""


class TrainingError(FairSVMError, RuntimeError):
    """An inner solve failed during training.

    ``iteration`` is the outer CCP iteration at which the failure occurred
    (0 is the initialization solve).
    """

    def __init__(self, message, iteration=None, result=None):
        super().__init__(message)
        self.iteration = iteration
        self.result = result
