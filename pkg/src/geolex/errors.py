"""Exception and warning types shared across geolex.

``DataError`` subclasses map to CLI exit code 3, ``ParseError`` subclasses
are per-line rejections that ingestion skips and counts.
"""


class GeolexError(Exception):
    pass


class DataError(GeolexError):
    pass


# --- record parsing -------------------------------------------------------

class ParseError(DataError):
    def __init__(self, field, message=""):
        self.field = field
        super().__init__(f"{field}: {message}" if message else field)


class MalformedJson(ParseError):
    def __init__(self, message=""):
        super().__init__("line", message)


class MissingField(ParseError):
    pass


class InvalidField(ParseError):
    pass


class InvalidCoordinate(ParseError):
    pass


class InvalidTimestamp(ParseError):
    pass


# --- vocabulary -----------------------------------------------------------

class ScopeMismatch(DataError):
    pass


class BothEmpty(DataError):
    pass


class MatrixEntryError(DataError):
    def __init__(self, i, j, labels=None):
        self.pair = (i, j)
        if labels is not None:
            msg = f"both vocabularies empty for pair ({labels[i]}, {labels[j]})"
        else:
            msg = f"both vocabularies empty for pair ({i}, {j})"
        super().__init__(msg)


# --- mobility -------------------------------------------------------------

class NoGeotaggedData(DataError):
    pass


class EmptyLandmarkSet(DataError):
    pass


# --- baselines ------------------------------------------------------------

class InsufficientBaselineData(DataError):
    def __init__(self, weekday):
        self.weekday = weekday
        super().__init__(f"no baseline observations for weekday {weekday}")


class TooFewPoints(DataError):
    pass


class SingleCluster(DataError):
    pass


class ZeroBaseline(DataError):
    pass


class ConstantSeries(DataError):
    pass


class LengthMismatch(DataError):
    pass


# --- warnings -------------------------------------------------------------

class GeolexWarning(UserWarning):
    pass


class InsufficientCorpus(GeolexWarning):
    pass


class NoPriorYears(GeolexWarning):
    pass


class DegenerateMatrix(GeolexWarning):
    pass


class DegenerateData(GeolexWarning):
    pass
