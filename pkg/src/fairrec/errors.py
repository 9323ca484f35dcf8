"""Exception types shared across the package."""


class FairrecError(Exception):
    """Base class for all errors raised by fairrec."""


class RatingParseError(FairrecError):
    """A ratings line is malformed (wrong field count or non-numeric field)."""


class RatingRangeError(FairrecError):
    """A rating value lies outside the 1-5 star scale."""


class DuplicateRatingError(FairrecError):
    """The same (user, item) pair appears more than once."""


class CandidateShortfallError(FairrecError):
    """A user has fewer candidate items than the requested list size."""


class InvalidInputError(FairrecError):
    """An argument violates a documented precondition."""


class FactorizationError(FairrecError):
    """Matrix factorization produced non-finite factors."""
