"""Exception types shared across the framework."""


class AdaptiFlowError(Exception):
    """Base class for all framework errors."""


class DuplicateCollectorId(AdaptiFlowError):
    pass


class DuplicateActionId(AdaptiFlowError):
    pass


class DuplicateEventName(AdaptiFlowError):
    pass


class UnknownAction(AdaptiFlowError):
    pass


class UnknownEvent(AdaptiFlowError):
    pass


class UnknownCollector(AdaptiFlowError):
    pass


class ActionFailed(AdaptiFlowError):
    """Raised by an actuator whose underlying operation failed."""


class CollectorUnavailable(AdaptiFlowError):
    """Raised by a collector that cannot read its observable.

    Built-in collectors prefer reporting boolean health keys as false
    instead of raising; custom collectors may choose to raise.
    """


class TargetUnreachable(AdaptiFlowError):
    """A remote node did not answer within the transport timeout."""


class AddressInUse(AdaptiFlowError):
    pass


class MalformedLine(AdaptiFlowError):
    def __init__(self, line_no: int, reason: str = ""):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {reason}" if reason else f"line {line_no}")


class NonMonotonicTime(AdaptiFlowError):
    def __init__(self, line_no: int):
        self.line_no = line_no
        super().__init__(f"line {line_no}: time values must be strictly increasing")


class UnresolvedReference(AdaptiFlowError):
    def __init__(self, path: str, detail: str = ""):
        self.path = path
        super().__init__(f"{path}: {detail}" if detail else path)


class InvalidThreshold(AdaptiFlowError):
    def __init__(self, path: str, detail: str = ""):
        self.path = path
        super().__init__(f"{path}: {detail}" if detail else path)
