"""Exception types shared across the toolkit."""


class RecourseError(Exception):
    """Base class for all toolkit errors."""


# --- data / model ---

class MissingColumn(RecourseError):
    pass


class BadLevel(RecourseError):
    def __init__(self, name, value, line):
        super().__init__(f"line {line}: feature {name!r} has no level matching {value!r}")
        self.name = name
        self.value = value
        self.line = line


class EmptyDataset(RecourseError):
    pass


class ScalerNotFitted(RecourseError):
    pass


class SingleClassDataset(RecourseError):
    pass


class NonFiniteLoss(RecourseError):
    pass


class SchemaMismatch(RecourseError):
    pass


# --- counterfactual search ---

class NoCounterfactualFound(RecourseError):
    pass


class CandidateBudgetExceeded(RecourseError):
    pass


# --- prototype selection ---

class ClassAbsent(RecourseError):
    pass


class MTooLarge(RecourseError):
    pass


class EmptyPrototypeSet(RecourseError):
    pass


# --- directive search ---

class NotActionableFeature(RecourseError):
    pass


class NoChildren(RecourseError):
    pass


class AlreadyExpanded(RecourseError):
    pass


class TerminalNode(RecourseError):
    pass


class NoDirectiveFound(RecourseError):
    pass


# --- scenario corpus ---

class CorpusInvalid(RecourseError):
    def __init__(self, problems):
        super().__init__("; ".join(problems))
        self.problems = list(problems)


class ArtifactSchemaMismatch(RecourseError):
    pass


# --- study harness ---

class CorpusTooSmall(RecourseError):
    pass


class UnknownSession(RecourseError):
    pass


class OutOfPlanTask(RecourseError):
    pass


class DuplicateResponse(RecourseError):
    pass


class AnswerOutOfRange(RecourseError):
    pass


# --- statistics ---

class ZeroTotal(RecourseError):
    pass


class IncompleteMatrix(RecourseError):
    pass


class DegenerateBlocks(RecourseError):
    pass


class NoResponses(RecourseError):
    pass
