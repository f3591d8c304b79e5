"""
Errors raised by the solver.
"""
class MSABaseError(Exception):
    """
    Base exception for the solver. The info payload is whatever the raising
    site wants the caller (or the error record) to see.
    """
    def __init__(self, info: any=None):
        super().__init__(info)
        self.info = info

class MSAInputError(MSABaseError):
    """
    A residue, sequence or sequence file is not valid input.
    """
    pass

class MSADimensionError(MSABaseError):
    """
    A row, bit vector or amplitude array has the wrong size.
    """
    pass

class MSACapacityError(MSABaseError):
    """
    The qubit count is over the enumeration or statevector cap.
    """
    pass

class MSAParameterError(MSABaseError):
    pass

class MSAConfigError(MSABaseError):
    """
    Scenario validation failed. info is the list of field-level messages.
    """
    def __str__(self):
        if isinstance(self.info, list):
            return "; ".join(self.info)
        return str(self.info)

class MSAStudyError(MSABaseError):
    pass

class MSASafeEnvError(MSABaseError):
    pass

class MSATimeoutError(MSABaseError):
    """
    A seeded run went over the scenario's timeout.
    """
    pass
