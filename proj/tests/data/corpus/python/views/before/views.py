from flask import Flask, request

app = Flask(__name__)
app.config["DEBUG"] = True


@app.route("/greet")
def greet():
    name = request.args.get("name", "")

    def wrap(text):
        return "<h1>" + text + "</h1>"

    return wrap(name)
