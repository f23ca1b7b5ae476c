"""Exception hierarchy shared by every voxid module."""


class VoxidError(Exception):
    """Base class for all errors raised by voxid."""


# audio

class AudioError(VoxidError):
    pass


class MissingFile(AudioError, FileNotFoundError):
    pass


class NotRiffWave(AudioError, ValueError):
    pass


class UnsupportedEncoding(AudioError, ValueError):
    pass


class UnsupportedBitDepth(AudioError, ValueError):
    pass


class TruncatedData(AudioError, ValueError):
    pass


class ClipTooShort(AudioError, ValueError):
    pass


# mfcc

class MfccError(VoxidError, ValueError):
    pass


class NegativeFrequency(MfccError):
    pass


class NegativeMel(MfccError):
    pass


class FrameTooLong(MfccError):
    pass


class NonPowerOfTwo(MfccError):
    pass


class DegenerateBank(MfccError):
    pass


class LengthMismatch(MfccError):
    pass


class BadCoeffCount(MfccError):
    pass


class SampleRateMismatch(MfccError):
    pass


class InvalidConfig(MfccError):
    pass


# features / svm

class FeatureError(VoxidError, ValueError):
    pass


class EmptyUtterance(FeatureError):
    pass


class RaggedVectors(FeatureError):
    pass


class EmptyDataset(FeatureError):
    pass


class DimensionMismatch(FeatureError):
    pass


class SvmError(VoxidError, ValueError):
    pass


class SingleClassData(SvmError):
    pass


class TooFewSpeakers(SvmError):
    pass


class IndexOutOfRange(SvmError, IndexError):
    pass


class IterationLimitExceeded(SvmError):
    """Solver hit its step budget; ``model`` holds the truncated result."""

    def __init__(self, message, model=None):
        super().__init__(message)
        self.model = model


# model_store

class StoreError(VoxidError):
    pass


class IoFailure(StoreError, OSError):
    pass


class MissingStoreFile(IoFailure, MissingFile):
    """A model or dataset file that does not exist."""


class UnknownVersion(StoreError, ValueError):
    pass


class MalformedModel(StoreError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConsistencyError(StoreError, ValueError):
    pass


class MalformedCsv(StoreError, ValueError):
    pass


class RaggedRows(MalformedCsv):
    pass


# cli

class UnknownLabel(VoxidError, ValueError):
    pass


class BadSizeList(VoxidError, ValueError):
    pass
