"""Exception types raised across the package."""


class ComptraError(Exception):
    """Base class for all package errors."""


# -- corpus loading ----------------------------------------------------------

class MissingFile(ComptraError):
    def __init__(self, path):
        super().__init__(f"file not found: {path}")
        self.path = str(path)


class LineCountMismatch(ComptraError):
    def __init__(self, n_src, n_tgt):
        super().__init__(f"source/target line counts differ: {n_src} vs {n_tgt}")
        self.n_src = n_src
        self.n_tgt = n_tgt


class MalformedRecord(ComptraError):
    def __init__(self, line_no, reason=""):
        msg = f"malformed record at line {line_no}"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)
        self.line_no = line_no


class UnknownLanguage(ComptraError):
    def __init__(self, code):
        super().__init__(f"unknown language code: {code!r}")
        self.code = code


# -- dependency trees --------------------------------------------------------

class MalformedConllu(ComptraError):
    def __init__(self, line_no, reason=""):
        msg = f"malformed tree line {line_no}"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)
        self.line_no = line_no


class MultipleRoots(ComptraError):
    def __init__(self, block_no):
        super().__init__(f"tree block {block_no} has more than one root")
        self.block_no = block_no


class NoRoot(ComptraError):
    def __init__(self, block_no):
        super().__init__(f"tree block {block_no} has no root")
        self.block_no = block_no


# -- retrieval ---------------------------------------------------------------

class EmptyPool(ComptraError):
    pass


class DimensionMismatch(ComptraError):
    def __init__(self, expected, got):
        super().__init__(f"vector dimension mismatch: expected {expected}, got {got}")
        self.expected = expected
        self.got = got


class ZeroVector(ComptraError):
    def __init__(self, index):
        super().__init__(f"vector {index} has zero norm")
        self.index = index


# -- LLM transport -----------------------------------------------------------

class TransportError(ComptraError):
    def __init__(self, cause, status=None):
        msg = f"request failed: {cause}"
        if status is not None:
            msg = f"request failed with status {status}: {cause}"
        super().__init__(msg)
        self.status = status
        self.cause = cause


class CassetteMiss(ComptraError):
    def __init__(self, digest):
        super().__init__(f"no cassette record for request digest {digest}")
        self.digest = digest


class MalformedResponse(ComptraError):
    pass


# -- prompts & decomposition -------------------------------------------------

class EmptyDemoField(ComptraError):
    def __init__(self, index):
        super().__init__(f"demonstration {index} has an empty source or target")
        self.index = index


class NoPropositionsFound(ComptraError):
    pass


class MissingTree(ComptraError):
    def __init__(self, sentence_id):
        super().__init__(f"no dependency tree for sentence {sentence_id}")
        self.sentence_id = sentence_id


# -- pipeline & metrics ------------------------------------------------------

class ScorerFailure(ComptraError):
    pass


class LengthMismatch(ComptraError):
    def __init__(self, n_hyp, n_ref):
        super().__init__(f"hypothesis/reference counts differ: {n_hyp} vs {n_ref}")
        self.n_hyp = n_hyp
        self.n_ref = n_ref
