"""Community embeddings from comment dumps, and community-context classification.

Pipeline stages: ingest comment dumps into user/subreddit activity tables,
build the subreddit co-occurrence matrix, factorize it into embeddings,
query/evaluate the vector space, and run the context-channel classification
experiment.
"""

__version__ = "0.1.0"
