"""Exception types raised across the pipeline."""


class EEGError(Exception):
    """Base class for every error raised by this package."""


# -- recordings ---------------------------------------------------------------

class RecordingFormatError(EEGError):
    """Malformed CSV header, ragged rows or a bad sidecar."""


class NonFiniteSample(EEGError):
    def __init__(self, row, channel):
        super().__init__(f"non-finite sample at row {row}, channel {channel}")
        self.row = row
        self.channel = channel


class InvalidSamplingRate(EEGError):
    pass


class ChannelMismatch(EEGError):
    pass


class MissingChannel(EEGError):
    pass


# -- filtering / spectra ------------------------------------------------------

class InvalidBand(EEGError):
    pass


class OddOrder(EEGError):
    pass


class SignalTooShort(EEGError):
    pass


class InvalidWelchParams(EEGError):
    pass


class ScaleError(EEGError):
    """Operation requires linear power but got decibels (or vice versa)."""


# -- features -----------------------------------------------------------------

class BandOutOfRange(EEGError):
    pass


class ZeroTotalPower(EEGError):
    pass


class DegenerateAsymmetry(EEGError):
    pass


class ZeroMaxPower(EEGError):
    pass


# -- clinical -----------------------------------------------------------------

class MissingTimepoint(EEGError):
    pass


class ZeroBaseline(EEGError):
    pass


class InvalidScore(EEGError):
    pass


class EmptyCohort(EEGError):
    pass


# -- statistics ---------------------------------------------------------------

class EmptySample(EEGError):
    pass


class LengthMismatch(EEGError):
    pass


class AllZeroDifferences(EEGError):
    pass


class InvalidPValue(EEGError):
    pass


class UnknownFeature(EEGError):
    pass


# -- learning -----------------------------------------------------------------

class EmptyDataset(EEGError):
    pass


class SingleClass(EEGError):
    pass


class DegenerateGeometry(EEGError):
    pass


class DimensionMismatch(EEGError):
    pass


class ClassTooSmall(EEGError):
    pass


class SingleSubject(EEGError):
    pass


class AllZeroConfusion(EEGError):
    pass


# -- synthesis / configuration ------------------------------------------------

class InvalidSpec(EEGError):
    pass


class InfeasibleHdrsModel(EEGError):
    pass


class ConfigError(EEGError):
    pass
