"""Article-level trustworthiness and topic classification of online news
publishers: source registry, stratified sampling, polite crawling with WARC
archiving, XPath text extraction, boilerplate cleaning, dataset assembly,
a hashed n-gram baseline classifier, cross-validated evaluation, and an
HTTP service for triage workflows.
"""

__version__ = "0.1.0"
