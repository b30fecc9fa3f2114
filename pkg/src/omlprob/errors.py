"""Shared error base for the package."""


class OmlprobError(Exception):
    """Domain validation failure.

    `witness` points at the offending element(s); its shape depends on the
    concrete subclass (a name, a pair of names, sometimes values).
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness

    @property
    def kind(self):
        return type(self).__name__
