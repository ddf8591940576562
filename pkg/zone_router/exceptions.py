class InputError(Exception):
    pass


class MissingInputError(InputError):
    pass


class MalformedInputError(InputError):
    def __init__(self, path, offset: int, reason: str = ""):
        super().__init__(f"Malformed JSON in {path} at byte offset {offset}: {reason}")
        self.path = path
        self.offset = offset


class RouteValidationError(Exception):
    def __init__(self, route_id: str, message: str):
        super().__init__(f"Route {route_id}: {message}")
        self.route_id = route_id
        self.message = message


class ZoningError(Exception):
    pass


class DegenerateGeometryError(ValueError):
    pass


class SolverError(Exception):
    pass


class GPError(Exception):
    pass


class RankDeficiencyError(Exception):
    def __init__(self, columns):
        super().__init__(f"Design matrix is rank deficient, collinear columns: {', '.join(columns)}")
        self.columns = tuple(columns)


class SingleClassError(ValueError):
    pass


class ConfigurationError(Exception):
    pass
