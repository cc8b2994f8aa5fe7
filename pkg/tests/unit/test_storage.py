import io

import boto3
import pytest
from botocore.response import StreamingBody
from botocore.stub import Stubber

from logdoc import storage
from logdoc.knowledge_base import KnowledgeBase


@pytest.fixture
def s3():
    client = boto3.client('s3', region_name='us-east-1',
                          aws_access_key_id='testing', aws_secret_access_key='testing')
    with Stubber(client) as stubber:
        yield client, stubber
        stubber.assert_no_pending_responses()


def body(text):
    data = text.encode('utf-8')
    return {'Body': StreamingBody(io.BytesIO(data), len(data))}


def test_split_s3_uri():
    assert storage.split_s3_uri("s3://bucket/path/kb.txt") == ("bucket", "path/kb.txt")
    with pytest.raises(ValueError):
        storage.split_s3_uri("s3://bucket")
    assert storage.is_s3_uri("s3://b/k") and not storage.is_s3_uri("/tmp/k")
    assert storage.sibling_uri("s3://b/kb.txt", ".traces.jsonl") == "s3://b/kb.txt.traces.jsonl"


def test_read_text_from_s3(s3):
    client, stubber = s3
    stubber.add_response('get_object', body("hello"), {'Bucket': 'b', 'Key': 'k.txt'})
    assert storage.read_text("s3://b/k.txt", client) == "hello"


def test_write_text_to_s3(s3):
    client, stubber = s3
    stubber.add_response('put_object', {}, {
        'Bucket': 'b', 'Key': 'k.txt', 'Body': "héllo".encode('utf-8'),
        'ContentType': 'text/plain',
    })
    storage.write_text("s3://b/k.txt", "héllo", client)


def test_exists_on_s3(s3):
    client, stubber = s3
    stubber.add_response('head_object', {}, {'Bucket': 'b', 'Key': 'k.txt'})
    stubber.add_client_error('head_object', service_error_code='404', http_status_code=404,
                             expected_params={'Bucket': 'b', 'Key': 'gone.txt'})
    assert storage.exists("s3://b/k.txt", client)
    assert not storage.exists("s3://b/gone.txt", client)


def test_append_to_missing_s3_object(s3):
    client, stubber = s3
    stubber.add_client_error('head_object', service_error_code='NoSuchKey',
                             http_status_code=404,
                             expected_params={'Bucket': 'b', 'Key': 't.jsonl'})
    stubber.add_response('put_object', {}, {
        'Bucket': 'b', 'Key': 't.jsonl', 'Body': b'{"a": 1}\n',
        'ContentType': 'application/x-ndjson',
    })
    storage.append_text("s3://b/t.jsonl", '{"a": 1}\n', client)


def test_local_write_append_and_exists(tmp_path):
    path = str(tmp_path / "sub" / "doc.txt")
    assert not storage.exists(path)
    storage.write_text(path, "one\n")
    storage.append_text(path, "two\n")
    assert storage.read_text(path) == "one\ntwo\n"
    assert [p.name for p in (tmp_path / "sub").iterdir()] == ["doc.txt"]


def test_knowledge_base_round_trip_through_s3(s3):
    client, stubber = s3
    kb = KnowledgeBase()
    text = kb.dumps()
    stubber.add_response('put_object', {}, {
        'Bucket': 'b', 'Key': 'kb.txt', 'Body': text.encode('utf-8'),
        'ContentType': 'text/plain',
    })
    stubber.add_response('get_object', body(text), {'Bucket': 'b', 'Key': 'kb.txt'})
    kb.save("s3://b/kb.txt", client)
    assert KnowledgeBase.load("s3://b/kb.txt", client) == kb
