"""
Text storage by URI: local paths or ``s3://bucket/key`` objects.
Local writes are atomic (temporary file in the target directory, then rename).
"""
import logging
import os
import tempfile
from typing import Tuple

import boto3
from botocore.exceptions import ClientError

logger = logging.getLogger(__name__)

_s3_client = None


def get_s3_client():
    """Lazily create the shared S3 client."""
    global _s3_client
    if _s3_client is None:
        _s3_client = boto3.client('s3')
    return _s3_client


def set_s3_client(client) -> None:
    """Install a client (tests install a stubbed one)."""
    global _s3_client
    _s3_client = client


def is_s3_uri(uri: str) -> bool:
    return uri.startswith('s3://')


def split_s3_uri(uri: str) -> Tuple[str, str]:
    rest = uri[len('s3://'):]
    bucket, _, key = rest.partition('/')
    if not bucket or not key:
        raise ValueError(f"not an s3 object uri: {uri}")
    return bucket, key


def read_text(uri: str, client=None) -> str:
    """
    Read a UTF-8 text document.

    Args:
        uri (str): local path or s3://bucket/key
        client: optional boto3 S3 client

    Returns:
        str: document text
    """
    if is_s3_uri(uri):
        bucket, key = split_s3_uri(uri)
        s3 = client or get_s3_client()
        response = s3.get_object(Bucket=bucket, Key=key)
        return response['Body'].read().decode('utf-8')
    with open(uri, 'r', encoding='utf-8') as f:
        return f.read()


def write_text(uri: str, text: str, client=None, content_type: str = 'text/plain') -> None:
    """Write a UTF-8 text document; local files are replaced atomically."""
    if is_s3_uri(uri):
        bucket, key = split_s3_uri(uri)
        s3 = client or get_s3_client()
        s3.put_object(
            Bucket=bucket,
            Key=key,
            Body=text.encode('utf-8'),
            ContentType=content_type
        )
        logger.info("Wrote s3://%s/%s (%d bytes)", bucket, key, len(text))
        return

    directory = os.path.dirname(os.path.abspath(uri))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(prefix='.logdoc-', dir=directory)
    try:
        with os.fdopen(fd, 'w', encoding='utf-8') as f:
            f.write(text)
        os.replace(tmp_path, uri)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise
    logger.debug("Wrote %s (%d bytes)", uri, len(text))


def append_text(uri: str, text: str, client=None) -> None:
    """Append to a document (read-modify-write for S3 objects)."""
    if is_s3_uri(uri):
        current = read_text(uri, client) if exists(uri, client) else ''
        write_text(uri, current + text, client, content_type='application/x-ndjson')
        return
    with open(uri, 'a', encoding='utf-8') as f:
        f.write(text)


def exists(uri: str, client=None) -> bool:
    if is_s3_uri(uri):
        bucket, key = split_s3_uri(uri)
        s3 = client or get_s3_client()
        try:
            s3.head_object(Bucket=bucket, Key=key)
            return True
        except ClientError as e:
            code = e.response.get('Error', {}).get('Code')
            if code in ('404', 'NoSuchKey', 'NotFound'):
                return False
            raise
    return os.path.exists(uri)


def sibling_uri(uri: str, suffix: str) -> str:
    """``kb.txt`` -> ``kb.txt<suffix>`` for both local paths and S3 keys."""
    return uri + suffix
