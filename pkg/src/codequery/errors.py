"""Shared exception hierarchy.

Every error raised by this package derives from CodeQueryError so the CLI
can catch one type and report diagnostics without crashing the REPL.
"""


class CodeQueryError(Exception):
    pass


# --- tuple layer ---

class TupleError(CodeQueryError):
    pass


class DuplicateElementName(TupleError):
    pass


class EmptyTuple(TupleError):
    pass


class InvalidIdentifier(TupleError):
    pass


class TupleSyntaxError(TupleError):
    """Malformed tuple-set text; carries a position."""

    def __init__(self, message, line, column):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


# --- minilang ---

class ParseError(CodeQueryError):
    def __init__(self, message, file, line, column):
        super().__init__(f"{file}:{line}:{column}: {message}")
        self.file = file
        self.line = line
        self.column = column


class UnknownNodeId(CodeQueryError):
    pass


class NotAMethod(CodeQueryError):
    pass


class NotADeclaration(CodeQueryError):
    pass


# --- history ---

class NoRepository(CodeQueryError):
    pass


class UnknownRef(CodeQueryError):
    pass


class AmbiguousPrefix(CodeQueryError):
    pass


class UnknownIssue(CodeQueryError):
    pass


# --- engine / prompt ---

class CycleError(CodeQueryError):
    pass


class QueryError(CodeQueryError):
    def __init__(self, query, message):
        super().__init__(f"{query}: {message}")
        self.query = query


class DuplicateQueryName(CodeQueryError):
    pass


class PromptSyntaxError(CodeQueryError):
    def __init__(self, message, position):
        super().__init__(f"at {position}: {message}")
        self.position = position


class UnknownQuery(CodeQueryError):
    pass


class SelfReferentialAlias(CodeQueryError):
    pass


class DuplicateAlias(CodeQueryError):
    pass


# --- builtin queries ---

class FlagError(CodeQueryError):
    pass


class UnknownKind(CodeQueryError):
    pass


class BadRegex(CodeQueryError):
    pass


class NoMethodContext(CodeQueryError):
    pass


class MissingSelector(CodeQueryError):
    pass


class NotARelation(CodeQueryError):
    pass


class MissingStart(CodeQueryError):
    pass


class NotAMethodNode(CodeQueryError):
    pass


class WriteFailure(CodeQueryError):
    pass


class NoNumericElement(CodeQueryError):
    pass


class InputFileNotFound(CodeQueryError):
    pass


class EmptyHeader(CodeQueryError):
    pass


class MalformedMessage(CodeQueryError):
    pass


class NoNodeElement(CodeQueryError):
    pass


# --- script host ---

class ScriptCrash(CodeQueryError):
    pass


class ProtocolError(CodeQueryError):
    pass


class ScriptTimeout(CodeQueryError):
    pass


# --- cli ---

class FormatUnsupported(CodeQueryError):
    pass
