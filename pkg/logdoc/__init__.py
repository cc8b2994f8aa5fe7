"""
LogDoc: logic-based passage retrieval.

Documents are parsed into mixed-level logical forms and stored as Horn clause
facts tagged with fragment and document numbers; queries are proved against
them with meaning postulates admitted in stages.
"""
__version__ = "0.1.0"
