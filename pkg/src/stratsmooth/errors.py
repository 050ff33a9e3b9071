"""Exception hierarchy.

Every error carries an optional ``location`` (stratum ids, simplex indices,
witness points) so that callers such as the CLI can serialize it.
"""


class StratError(Exception):
    kind = "error"

    def __init__(self, message, location=None):
        super().__init__(message)
        self.message = message
        self.location = location

    def to_dict(self):
        out = {"error": self.kind, "message": self.message}
        if self.location is not None:
            out["location"] = self.location
        return out


class InputError(StratError, ValueError):
    kind = "input_error"


class SchemaError(InputError):
    kind = "schema_error"


class DisjointnessError(InputError):
    kind = "disjointness_error"


class FrontierError(InputError):
    kind = "frontier_error"


class DegenerateSimplexError(InputError):
    kind = "degenerate_simplex"


class StratumShapeError(InputError):
    kind = "stratum_shape_error"


class PreconditionError(StratError, ValueError):
    kind = "precondition_error"


class ConstructionError(StratError, RuntimeError):
    kind = "construction_error"


class ResourceError(StratError, RuntimeError):
    kind = "resource_error"


class LipschitzViolation(PreconditionError):
    kind = "lipschitz_violation"
